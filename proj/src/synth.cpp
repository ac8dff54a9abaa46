#include "vface/synth.hpp"

#include "vface/io_util.hpp"

#include <cmath>
#include <filesystem>

namespace vface {

Image white_noise_image(int width, int height, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 255.0);
    Image img(height, width);
    for (long i = 0; i < img.size(); ++i) img.data()[i] = quantize_u8(dist(rng));
    return img;
}

Image upscale2x_linear(const Image& src) {
    const KernelSpec linear{KernelKind::linear, -0.5};
    Image up = warp(src, AffineParams::scaling(2.0, 2.0), linear,
                    static_cast<int>(src.cols()) * 2, static_cast<int>(src.rows()) * 2);
    for (long i = 0; i < up.size(); ++i) up.data()[i] = quantize_u8(up.data()[i]);
    return up;
}

namespace {

// separable clamped box blur, one pass per axis
Image box_blur(const Image& src, int radius) {
    const long w = src.cols(), h = src.rows();
    const double inv = 1.0 / (2 * radius + 1);
    Image tmp(h, w), out(h, w);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += src(y, std::clamp(x + d, 0L, w - 1));
            tmp(y, x) = acc * inv;
        }
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int d = -radius; d <= radius; ++d)
                acc += tmp(std::clamp(y + d, 0L, h - 1), x);
            out(y, x) = acc * inv;
        }
    return out;
}

}  // namespace

Image smooth_subject_image(int size, std::uint64_t seed) {
    // heavily blurred noise: smooth, aperiodic, distinct per seed. Cosine
    // mixtures would be periodic by construction and trip the trace detector.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Image img(size, size);
    for (long i = 0; i < img.size(); ++i) img.data()[i] = gauss(rng);
    for (int pass = 0; pass < 3; ++pass) img = box_blur(img, 3);
    const double lo = img.minCoeff(), hi = img.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    for (long i = 0; i < img.size(); ++i)
        img.data()[i] = quantize_u8(40.0 + (img.data()[i] - lo) / span * 175.0);
    return img;
}

Image noisy_probe(const Image& base, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, sigma);
    Image img(base.rows(), base.cols());
    for (long i = 0; i < img.size(); ++i)
        img.data()[i] = quantize_u8(base.data()[i] + noise(rng));
    return img;
}

CorpusPaths synth_recognition_corpus(const CorpusSpec& spec, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::mt19937_64 rng(spec.seed);
    std::string train_csv, test_csv;
    char name[64];
    for (int s = 0; s < spec.subjects; ++s) {
        const std::string label = "subject" + std::string(s < 9 ? "0" : "") + std::to_string(s + 1);
        const Image base = smooth_subject_image(spec.image_size, spec.seed * 1000003ULL + s);
        const std::string rect = ",0,0," + std::to_string(spec.image_size) + "," +
                                 std::to_string(spec.image_size) + "\n";
        for (int i = 0; i < spec.train_per_subject; ++i) {
            std::snprintf(name, sizeof(name), "%s_train%02d.pgm", label.c_str(), i + 1);
            save_image(noisy_probe(base, spec.noise_sigma, rng), dir + "/" + name);
            train_csv += std::string(name) + "," + label + rect;
        }
        for (int i = 0; i < spec.test_per_subject; ++i) {
            std::snprintf(name, sizeof(name), "%s_test%02d.pgm", label.c_str(), i + 1);
            save_image(noisy_probe(base, spec.noise_sigma, rng), dir + "/" + name);
            test_csv += std::string(name) + "," + label + rect;
        }
    }
    CorpusPaths paths{dir + "/train.csv", dir + "/test.csv"};
    write_file_atomic(paths.train_manifest, train_csv);
    write_file_atomic(paths.test_manifest, test_csv);
    return paths;
}

}  // namespace vface
