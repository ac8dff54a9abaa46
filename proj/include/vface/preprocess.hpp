#pragma once

#include "vface/raster.hpp"
#include "vface/resample.hpp"

#include <optional>

namespace vface {

struct CropRect {
    int x0 = 0, y0 = 0, w = 0, h = 0;
};

struct PreprocConfig {
    int filter_size = 3;            // odd box-filter window
    double stretch_low_pct = 1.0;   // intensity percentiles for the stretch
    double stretch_high_pct = 99.0;
    int target_width = 32;          // recognition raster size
    int target_height = 32;
    KernelSpec resize_kernel{KernelKind::linear, -0.5};
};

// k x k box mean with edge clamping; k odd, k <= min(width, height).
Image average_filter(const Image& image, int k);

// Linear remap of the [low_pct, high_pct] intensity percentiles onto
// [0,255], clamped. Percentiles are nearest-rank over a 256-bin histogram.
// Degenerate images (hi == lo) are returned unchanged.
Image contrast_stretch(const Image& image, double low_pct, double high_pct);

// Classic CDF remap after quantizing to 256 bins:
// out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255).
// A single-valued image maps to all zeros.
Image hist_equalize(const Image& image);

// Exact pixel copy of the rectangle; throws on out-of-bounds.
Image crop(const Image& image, int x0, int y0, int w, int h);

// Pure scaling warp to w x h with the given kernel: output pixel i samples
// source coordinate i / scale (origin-aligned grid).
Image resize(const Image& image, int w, int h, const KernelSpec& spec);

// Recognition-path conditioning: average filter, contrast stretch, histogram
// equalization, optional face crop, resize to the target raster.
Image preprocess_chain(const Image& image, const PreprocConfig& config,
                       const std::optional<CropRect>& face = std::nullopt);

}  // namespace vface
