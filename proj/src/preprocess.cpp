#include "vface/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace vface {
namespace {

long clamp_index(long i, long n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

std::array<long, 256> histogram256(const Image& image) {
    std::array<long, 256> hist{};
    for (long i = 0; i < image.size(); ++i) {
        const long bin = std::lround(image.data()[i]);
        hist[static_cast<size_t>(std::clamp(bin, 0L, 255L))]++;
    }
    return hist;
}

// nearest-rank percentile over the 256-bin histogram
double percentile256(const std::array<long, 256>& hist, long count, double pct) {
    long rank = static_cast<long>(std::ceil(pct / 100.0 * double(count)));
    rank = std::max(1L, std::min(rank, count));
    long cum = 0;
    for (int v = 0; v < 256; ++v) {
        cum += hist[static_cast<size_t>(v)];
        if (cum >= rank) return double(v);
    }
    return 255.0;
}

}  // namespace

Image average_filter(const Image& image, int k) {
    if (k < 1 || k % 2 == 0)
        throw std::invalid_argument("average_filter: window must be odd and positive");
    if (k > image.cols() || k > image.rows())
        throw std::invalid_argument("average_filter: window larger than image");
    const long w = image.cols(), h = image.rows(), r = k / 2;
    // separable clamped box: rows then columns
    Image tmp(h, w);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long d = -r; d <= r; ++d) acc += image(y, clamp_index(x + d, w));
            tmp(y, x) = acc;
        }
    Image out(h, w);
    const double inv = 1.0 / (double(k) * double(k));
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (long d = -r; d <= r; ++d) acc += tmp(clamp_index(y + d, h), x);
            out(y, x) = acc * inv;
        }
    return out;
}

Image contrast_stretch(const Image& image, double low_pct, double high_pct) {
    if (!(low_pct < high_pct))
        throw std::invalid_argument("contrast_stretch: low percentile must be below high");
    const auto hist = histogram256(image);
    const double lo = percentile256(hist, image.size(), low_pct);
    const double hi = percentile256(hist, image.size(), high_pct);
    if (hi == lo) return image;
    return ((image - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0) * 255.0;
}

Image hist_equalize(const Image& image) {
    const auto hist = histogram256(image);
    const long n = image.size();
    std::array<long, 256> cdf{};
    long cum = 0;
    long cdf_min = 0;
    bool seen = false;
    for (int v = 0; v < 256; ++v) {
        cum += hist[static_cast<size_t>(v)];
        cdf[static_cast<size_t>(v)] = cum;
        if (!seen && hist[static_cast<size_t>(v)] > 0) {
            cdf_min = cum;
            seen = true;
        }
    }
    Image out(image.rows(), image.cols());
    if (n == cdf_min) {  // single distinct value: formula pins everything to 0
        out.setZero();
        return out;
    }
    const double denom = double(n - cdf_min);
    for (long i = 0; i < n; ++i) {
        const long bin = std::clamp(std::lround(image.data()[i]), 0L, 255L);
        out.data()[i] = std::round(double(cdf[static_cast<size_t>(bin)] - cdf_min) / denom * 255.0);
    }
    return out;
}

Image crop(const Image& image, int x0, int y0, int w, int h) {
    if (w < 1 || h < 1 || x0 < 0 || y0 < 0 ||
        x0 + w > image.cols() || y0 + h > image.rows())
        throw std::invalid_argument("crop: rectangle out of bounds");
    return image.block(y0, x0, h, w);
}

Image resize(const Image& image, int w, int h, const KernelSpec& spec) {
    if (w < 1 || h < 1) throw std::invalid_argument("resize: target size must be positive");
    const double sx = double(w) / double(image.cols());
    const double sy = double(h) / double(image.rows());
    return warp(image, AffineParams::scaling(sx, sy), spec, w, h);
}

Image preprocess_chain(const Image& image, const PreprocConfig& config,
                       const std::optional<CropRect>& face) {
    Image img = average_filter(image, config.filter_size);
    img = contrast_stretch(img, config.stretch_low_pct, config.stretch_high_pct);
    img = hist_equalize(img);
    if (face)
        img = crop(img, face->x0, face->y0, face->w, face->h);
    return resize(img, config.target_width, config.target_height, config.resize_kernel);
}

}  // namespace vface
