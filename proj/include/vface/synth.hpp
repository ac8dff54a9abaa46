#pragma once

#include "vface/raster.hpp"
#include "vface/resample.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace vface {

// Uniform noise in [0,255], quantized to integers (what an 8-bit file holds).
Image white_noise_image(int width, int height, std::mt19937_64& rng);

// 2x upscale with the linear kernel, quantized to integers: the canonical
// forged sample for detector calibration.
Image upscale2x_linear(const Image& src);

// Smooth low-frequency cosine mixture, deterministic per seed; values in
// roughly [40, 215]. Distinct seeds give distinct "subjects".
Image smooth_subject_image(int size, std::uint64_t seed);

// base + N(0, sigma^2) per pixel, quantized and clamped to [0,255].
Image noisy_probe(const Image& base, double sigma, std::mt19937_64& rng);

// Labeled recognition corpus on disk: one subject per label, PGM files plus
// train/test manifests ("path,label,x0,y0,w,h" rows, full-frame crops).
struct CorpusSpec {
    int subjects = 10;
    int train_per_subject = 3;
    int test_per_subject = 5;
    int image_size = 64;
    double noise_sigma = 4.0;
    std::uint64_t seed = 1;
};

struct CorpusPaths {
    std::string train_manifest;
    std::string test_manifest;
};

CorpusPaths synth_recognition_corpus(const CorpusSpec& spec, const std::string& dir);

}  // namespace vface
