#include "vface/raster.hpp"

#include "vface/io_util.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace vface {
namespace {

constexpr unsigned char kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open file");
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw IoError(path + ": read failed");
    return bytes;
}

// --- PGM ------------------------------------------------------------------

// Reads one PNM header integer, skipping whitespace and '#' comments.
long pnm_int(const unsigned char* data, size_t size, size_t& pos, const std::string& path) {
    while (pos < size) {
        if (data[pos] == '#') {
            while (pos < size && data[pos] != '\n') ++pos;
        } else if (std::isspace(data[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= size || !std::isdigit(data[pos]))
        throw IoError(path + ": malformed PGM header");
    long value = 0;
    while (pos < size && std::isdigit(data[pos])) {
        value = value * 10 + (data[pos] - '0');
        if (value > 1000000000L) throw IoError(path + ": malformed PGM header");
        ++pos;
    }
    return value;
}

Image load_pgm(const std::vector<unsigned char>& bytes, const std::string& path) {
    size_t pos = 2;  // past "P5"
    const long width = pnm_int(bytes.data(), bytes.size(), pos, path);
    const long height = pnm_int(bytes.data(), bytes.size(), pos, path);
    const long maxval = pnm_int(bytes.data(), bytes.size(), pos, path);
    if (width <= 0 || height <= 0)
        throw IoError(path + ": malformed PGM header");
    if (maxval > 255)
        throw IoError(path + ": unsupported bit depth (maxval " + std::to_string(maxval) + ")");
    if (maxval <= 0)
        throw IoError(path + ": malformed PGM header");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw IoError(path + ": malformed PGM header");
    ++pos;  // single whitespace byte before raster data
    const size_t need = static_cast<size_t>(width) * static_cast<size_t>(height);
    if (bytes.size() - pos < need)
        throw IoError(path + ": truncated pixel data");
    Image img(height, width);
    for (size_t i = 0; i < need; ++i)
        img.data()[i] = static_cast<double>(bytes[pos + i]);
    return img;
}

// --- PNG ------------------------------------------------------------------

std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

// Reverses the per-scanline PNG filters in place; returns packed pixel bytes.
std::vector<unsigned char> unfilter(const std::vector<unsigned char>& raw,
                                    long width, long height, int bpp,
                                    const std::string& path) {
    const size_t stride = static_cast<size_t>(width) * bpp;
    std::vector<unsigned char> out(stride * height);
    std::vector<unsigned char> prev(stride, 0);
    std::vector<unsigned char> cur(stride);
    for (long y = 0; y < height; ++y) {
        const unsigned char* line = raw.data() + static_cast<size_t>(y) * (stride + 1);
        const int filter = line[0];
        const unsigned char* src = line + 1;
        switch (filter) {
            case 0:
                std::memcpy(cur.data(), src, stride);
                break;
            case 1:
                for (size_t i = 0; i < stride; ++i) {
                    const int left = i >= size_t(bpp) ? cur[i - bpp] : 0;
                    cur[i] = static_cast<unsigned char>(src[i] + left);
                }
                break;
            case 2:
                for (size_t i = 0; i < stride; ++i)
                    cur[i] = static_cast<unsigned char>(src[i] + prev[i]);
                break;
            case 3:
                for (size_t i = 0; i < stride; ++i) {
                    const int left = i >= size_t(bpp) ? cur[i - bpp] : 0;
                    cur[i] = static_cast<unsigned char>(src[i] + (left + prev[i]) / 2);
                }
                break;
            case 4:
                for (size_t i = 0; i < stride; ++i) {
                    const int left = i >= size_t(bpp) ? cur[i - bpp] : 0;
                    const int ul = i >= size_t(bpp) ? prev[i - bpp] : 0;
                    cur[i] = static_cast<unsigned char>(src[i] + paeth(left, prev[i], ul));
                }
                break;
            default:
                throw IoError(path + ": corrupt PNG (bad filter type)");
        }
        std::memcpy(out.data() + static_cast<size_t>(y) * stride, cur.data(), stride);
        std::swap(prev, cur);
    }
    return out;
}

Image load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    size_t pos = 8;
    long width = 0, height = 0;
    int bit_depth = 0, color_type = 0, interlace = 0;
    bool have_ihdr = false, have_iend = false;
    std::vector<unsigned char> idat;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + size_t(len) > bytes.size())
            throw IoError(path + ": truncated PNG chunk");
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const unsigned char* data = &bytes[pos + 8];
        const std::uint32_t want_crc = be32(&bytes[pos + 8 + len]);
        std::uint32_t crc = crc32(0L, Z_NULL, 0);
        crc = crc32(crc, &bytes[pos + 4], len + 4);
        if (crc != want_crc) throw IoError(path + ": corrupt PNG (chunk CRC mismatch)");
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw IoError(path + ": malformed PNG header");
            width = be32(data);
            height = be32(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            interlace = data[12];
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            have_iend = true;
            break;
        }
        pos += 12 + len;
    }
    if (!have_ihdr || !have_iend) throw IoError(path + ": malformed PNG header");
    if (width <= 0 || height <= 0) throw IoError(path + ": malformed PNG header");
    if (bit_depth != 8)
        throw IoError(path + ": unsupported bit depth (" + std::to_string(bit_depth) + "-bit PNG)");
    if (color_type != 0 && color_type != 2)
        throw IoError(path + ": unsupported PNG color type " + std::to_string(color_type));
    if (interlace != 0) throw IoError(path + ": unsupported interlaced PNG");

    const int bpp = color_type == 2 ? 3 : 1;
    const size_t expected = static_cast<size_t>(height) * (static_cast<size_t>(width) * bpp + 1);
    std::vector<unsigned char> raw(expected);
    uLongf dest_len = static_cast<uLongf>(expected);
    const int rc = uncompress(raw.data(), &dest_len, idat.data(), static_cast<uLong>(idat.size()));
    if (rc != Z_OK || dest_len != expected)
        throw IoError(path + ": corrupt PNG pixel data");
    const std::vector<unsigned char> pixels = unfilter(raw, width, height, bpp, path);

    if (bpp == 1) {
        Image img(height, width);
        for (size_t i = 0; i < pixels.size(); ++i)
            img.data()[i] = static_cast<double>(pixels[i]);
        return img;
    }
    Image r(height, width), g(height, width), b(height, width);
    for (long i = 0; i < width * height; ++i) {
        r.data()[i] = pixels[3 * i + 0];
        g.data()[i] = pixels[3 * i + 1];
        b.data()[i] = pixels[3 * i + 2];
    }
    return to_grayscale(r, g, b);
}

}  // namespace

Image load_image(const std::string& path) {
    const std::vector<unsigned char> bytes = read_all(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5')
        return load_pgm(bytes, path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
        return load_png(bytes, path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '6')
        throw IoError(path + ": unsupported PNM variant (only binary P5)");
    throw IoError(path + ": unrecognized image format");
}

void save_image(const Image& image, const std::string& path) {
    if (image.rows() < 1 || image.cols() < 1)
        throw std::invalid_argument("save_image: empty image");
    std::string out = "P5\n" + std::to_string(image.cols()) + " " +
                      std::to_string(image.rows()) + "\n255\n";
    const size_t header = out.size();
    out.resize(header + static_cast<size_t>(image.size()));
    for (long i = 0; i < image.size(); ++i)
        out[header + i] = static_cast<char>(static_cast<unsigned char>(quantize_u8(image.data()[i])));
    write_file_atomic(path, out);
}

Image to_grayscale(const Image& r, const Image& g, const Image& b) {
    if (r.rows() != g.rows() || r.cols() != g.cols() ||
        r.rows() != b.rows() || r.cols() != b.cols())
        throw std::invalid_argument("to_grayscale: channel size mismatch");
    return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace vface
