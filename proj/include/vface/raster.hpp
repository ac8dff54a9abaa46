#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace vface {

// Grayscale image. rows() = height (y), cols() = width (x); row-major storage
// so data() is the row-major pixel sequence with a top-left origin.
// Intensities stay real-valued end to end; quantization to [0,255] bytes
// happens only when a file is written.
using Image = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 1-D sample sequence together with its sampling step.
struct Signal {
    Eigen::ArrayXd samples;
    double step = 1.0;
};

// File-level failures: missing files, malformed headers, short reads,
// checksum mismatches.
class IoError : public std::runtime_error {
 public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Rounds half away from zero, then clamps to [0,255]. The exact pixel
// mapping applied on save.
inline double quantize_u8(double v) {
    double r = std::round(v);
    return r < 0.0 ? 0.0 : (r > 255.0 ? 255.0 : r);
}

// Reads a binary PGM (P5) or an 8-bit PNG (grayscale or RGB, non-interlaced).
// PNG color data is collapsed with to_grayscale. Distinct IoError messages
// for unreadable files, malformed headers and unsupported bit depths.
Image load_image(const std::string& path);

// Writes a binary PGM: "P5\n<width> <height>\n255\n" + row-major bytes.
// Values are quantized with quantize_u8.
void save_image(const Image& image, const std::string& path);

// Rec.601 luma from equally sized channel planes: 0.299 R + 0.587 G + 0.114 B.
Image to_grayscale(const Image& r, const Image& g, const Image& b);

}  // namespace vface
