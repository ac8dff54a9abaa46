#include "vface/authenticate.hpp"

#include "vface/io_util.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace vface {

Image derivative_image(const Image& image, int n, Axis axis) {
    if (n != 1 && n != 2)
        throw std::invalid_argument("derivative_image: order must be 1 or 2");
    const long len = axis == Axis::cols ? image.cols() : image.rows();
    if (len < n + 1)
        throw std::invalid_argument("derivative_image: image too small along axis");
    if (axis == Axis::cols) {
        const long w = image.cols() - n, h = image.rows();
        Image out(h, w);
        for (long y = 0; y < h; ++y)
            for (long x = 0; x < w; ++x)
                out(y, x) = n == 1 ? image(y, x + 1) - image(y, x)
                                   : image(y, x + 2) - 2.0 * image(y, x + 1) + image(y, x);
        return out;
    }
    const long w = image.cols(), h = image.rows() - n;
    Image out(h, w);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x)
            out(y, x) = n == 1 ? image(y + 1, x) - image(y, x)
                               : image(y + 2, x) - 2.0 * image(y + 1, x) + image(y, x);
    return out;
}

Sinogram radon(const Image& image, const std::vector<int>& angles) {
    const long w = image.cols(), h = image.rows();
    if (w < 1 || h < 1) throw std::invalid_argument("radon: empty image");
    const double diag = std::sqrt(double(w) * w + double(h) * h);
    const long bins = static_cast<long>(std::ceil(diag));
    Sinogram sg;
    sg.angles = angles;
    sg.projections = Eigen::MatrixXd::Zero(bins, static_cast<long>(angles.size()));
    sg.offset = Eigen::VectorXi::Zero(static_cast<long>(angles.size()));
    sg.support = Eigen::VectorXi::Zero(static_cast<long>(angles.size()));
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);

    for (size_t a = 0; a < angles.size(); ++a) {
        const int deg = ((angles[a] % 180) + 180) % 180;
        auto col = sg.projections.col(static_cast<long>(a));
        if (deg == 0) {
            // x' = x: whole columns land in single bins
            const long off = (bins - w) / 2;
            for (long y = 0; y < h; ++y)
                for (long x = 0; x < w; ++x)
                    col[off + x] += image(y, x);
            sg.offset[static_cast<long>(a)] = static_cast<int>(off);
            sg.support[static_cast<long>(a)] = static_cast<int>(w);
            continue;
        }
        if (deg == 90) {
            const long off = (bins - h) / 2;
            for (long y = 0; y < h; ++y)
                for (long x = 0; x < w; ++x)
                    col[off + y] += image(y, x);
            sg.offset[static_cast<long>(a)] = static_cast<int>(off);
            sg.support[static_cast<long>(a)] = static_cast<int>(h);
            continue;
        }
        const double t = deg * M_PI / 180.0;
        const double c = std::cos(t), s = std::sin(t);
        const double center = 0.5 * (bins - 1) - (cx * c + cy * s);
        double pmin = 1e300, pmax = -1e300;
        for (int corner = 0; corner < 4; ++corner) {
            const double xc = (corner & 1) ? (w - 1) : 0.0;
            const double yc = (corner & 2) ? (h - 1) : 0.0;
            const double p = xc * c + yc * s + center;
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        // 2x2 subpixel splats suppress the lattice-vs-bin aliasing that a
        // whole-pixel splat shows near 45 degrees; indices are clamped so
        // corner subpixels cannot step outside the bin range
        const double sub[2] = {-0.25, 0.25};
        for (long y = 0; y < h; ++y) {
            for (int sy = 0; sy < 2; ++sy) {
                const double base = (y + sub[sy]) * s + center;
                for (long x = 0; x < w; ++x) {
                    const double v = 0.25 * image(y, x);
                    for (int sx = 0; sx < 2; ++sx) {
                        const double p = (x + sub[sx]) * c + base;
                        long i0 = static_cast<long>(std::floor(p));
                        const double f = p - i0;
                        i0 = std::clamp(i0, 0L, bins - 2);
                        col[i0] += v * (1.0 - f);
                        if (f > 0.0) col[i0 + 1] += v * f;
                    }
                }
            }
        }
        const double reach = 0.25 * (std::abs(c) + std::abs(s));
        const long lo = std::clamp(static_cast<long>(std::floor(pmin - reach)), 0L, bins - 1);
        const long hi = std::clamp(static_cast<long>(std::floor(pmax + reach)) + 1, lo, bins - 1);
        sg.offset[static_cast<long>(a)] = static_cast<int>(lo);
        sg.support[static_cast<long>(a)] = static_cast<int>(hi - lo + 1);
    }
    return sg;
}

AutocovSeq autocovariance(const Eigen::ArrayXd& projection, int max_lag) {
    const long n = projection.size();
    if (max_lag < 1) throw std::invalid_argument("autocovariance: max_lag must be >= 1");
    if (n <= max_lag)
        throw std::invalid_argument("autocovariance: projection shorter than max_lag + 1");
    const double mean = projection.mean();
    const Eigen::ArrayXd d = projection - mean;
    AutocovSeq r;
    r.values.resize(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k)
        r.values[k] = (d.head(n - k) * d.tail(n - k)).sum();
    return r;
}

Eigen::ArrayXd autocov_spectrum(const AutocovSeq& acov) {
    const long n = acov.values.size();
    if (n < 16) throw std::invalid_argument("autocov_spectrum: sequence too short");
    if (n > kSpectrumSize)
        throw std::invalid_argument("autocov_spectrum: sequence longer than FFT size");
    const double mean = acov.values.mean();
    std::vector<double> padded(kSpectrumSize, 0.0);
    for (long i = 0; i < n; ++i) {
        const double hann = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / double(n - 1)));
        padded[static_cast<size_t>(i)] = (acov.values[i] - mean) * hann;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> freq;
    fft.fwd(freq, padded);
    Eigen::ArrayXd mag(kSpectrumSize / 2 + 1);
    for (int i = 0; i <= kSpectrumSize / 2; ++i)
        mag[i] = std::abs(freq[static_cast<size_t>(i)]);
    return mag;
}

namespace {

SpectralPeak peak_of_spectrum(const Eigen::ArrayXd& mag, double f_lo) {
    const int nfft = kSpectrumSize;
    const int lo = static_cast<int>(std::floor(f_lo * nfft)) + 1;
    const int hi = nfft / 2;
    SpectralPeak pk;
    if (lo > hi) return pk;
    int arg = lo;
    for (int i = lo; i <= hi; ++i)
        if (mag[i] > mag[arg]) arg = i;
    const double peak = mag[arg];
    if (peak <= 0.0) return pk;
    std::vector<double> band(mag.data() + lo, mag.data() + hi + 1);
    std::nth_element(band.begin(), band.begin() + band.size() / 2, band.end());
    double median = band[band.size() / 2];
    if (band.size() % 2 == 0) {
        const double upper = median;
        std::nth_element(band.begin(), band.begin() + band.size() / 2 - 1, band.end());
        median = 0.5 * (band[band.size() / 2 - 1] + upper);
    }
    pk.score = peak / std::max(median, 1e-300);
    pk.frequency = double(arg) / nfft;
    return pk;
}

}  // namespace

SpectralPeak periodicity_score(const AutocovSeq& acov, double f_lo) {
    return peak_of_spectrum(autocov_spectrum(acov), f_lo);
}

const char* to_string(Authenticity a) {
    switch (a) {
        case Authenticity::Original: return "ORIGINAL";
        case Authenticity::Forged: return "FORGED";
        case Authenticity::Indeterminate: return "INDETERMINATE";
    }
    return "?";
}

Verdict authenticate(const Image& image, const DetectorConfig& config) {
    if (image.cols() < 32 || image.rows() < 32)
        throw std::invalid_argument("authenticate: image must be at least 32x32");
    Verdict v;
    v.threshold = config.threshold;
    const double mean = image.mean();
    const double var = (image - mean).square().mean();
    if (var < config.flat_floor) {
        v.label = Authenticity::Indeterminate;
        return v;
    }

    const std::vector<int> angles = all_degrees();
    v.report.per_angle_score = Eigen::ArrayXd::Zero(static_cast<long>(angles.size()));
    Eigen::ArrayXd best_acov_spectrum;
    for (int order : {2, 1}) {
        for (Axis axis : {Axis::cols, Axis::rows}) {
            const Image d = derivative_image(image, order, axis).abs();
            const Sinogram sg = radon(d, angles);
            for (size_t a = 0; a < angles.size(); ++a) {
                const int support = sg.support[static_cast<long>(a)];
                const int max_lag = std::min(support / 2, config.max_lag_cap);
                if (max_lag < 15) continue;
                const Eigen::ArrayXd proj =
                    sg.projections.col(static_cast<long>(a))
                        .segment(sg.offset[static_cast<long>(a)], support)
                        .array();
                const AutocovSeq acov = autocovariance(proj, max_lag);
                const Eigen::ArrayXd spec = autocov_spectrum(acov);
                const SpectralPeak pk = peak_of_spectrum(spec, config.f_lo);
                auto& cell = v.report.per_angle_score[static_cast<long>(a)];
                cell = std::max(cell, pk.score);
                if (pk.score > v.report.score) {
                    v.report.score = pk.score;
                    v.report.best_angle = angles[a];
                    v.report.best_frequency = pk.frequency;
                    v.report.best_order = order;
                    v.report.best_axis = axis;
                    best_acov_spectrum = spec;
                }
            }
        }
    }
    v.report.spectrum = best_acov_spectrum;
    v.score = v.report.score;
    v.label = v.score > config.threshold ? Authenticity::Forged : Authenticity::Original;
    return v;
}

void emit_spectrum_csv(const Verdict& verdict, const std::string& path) {
    if (verdict.report.spectrum.size() == 0)
        throw std::invalid_argument("emit_spectrum: verdict has no spectrum report");
    std::string out = "frequency,magnitude\n";
    const auto& spec = verdict.report.spectrum;
    for (long i = 0; i < spec.size(); ++i) {
        out += format_g9(double(i) / kSpectrumSize);
        out += ',';
        out += format_g9(spec[i]);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void emit_spectrum_svg(const Verdict& verdict, const std::string& path) {
    if (verdict.report.spectrum.size() == 0)
        throw std::invalid_argument("emit_spectrum: verdict has no spectrum report");
    const auto& spec = verdict.report.spectrum;
    const double peak = std::max(spec.maxCoeff(), 1e-300);
    const double margin = 20.0, width = 800.0, height = 400.0;
    std::string pts;
    char buf[64];
    for (long i = 0; i < spec.size(); ++i) {
        const double px = margin + (width - 2 * margin) * double(i) / double(spec.size() - 1);
        const double py = height - margin - (height - 2 * margin) * (spec[i] / peak);
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px, py);
        pts += buf;
    }
    if (!pts.empty()) pts.pop_back();
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\">\n"
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"" +
        pts + "\"/>\n</svg>\n";
    write_file_atomic(path, svg);
}

CalibrationResult calibrate_threshold(std::vector<double> pristine_scores,
                                      std::vector<double> forged_scores) {
    if (pristine_scores.empty() || forged_scores.empty())
        throw std::invalid_argument("calibrate_threshold: empty corpus");
    std::sort(pristine_scores.begin(), pristine_scores.end());
    std::sort(forged_scores.begin(), forged_scores.end());
    const size_t np = pristine_scores.size(), nf = forged_scores.size();

    auto rates_at = [&](double thr) {
        // label Forged iff score > thr
        const auto fp = pristine_scores.end() -
                        std::upper_bound(pristine_scores.begin(), pristine_scores.end(), thr);
        const auto tp = forged_scores.end() -
                        std::upper_bound(forged_scores.begin(), forged_scores.end(), thr);
        return std::pair<double, double>{double(tp) / double(nf), double(fp) / double(np)};
    };

    CalibrationResult r;
    // nearest-rank 99th percentile of pristine scores
    size_t rank = static_cast<size_t>(std::ceil(0.99 * double(np)));
    rank = std::max<size_t>(1, std::min(rank, np));
    r.threshold = pristine_scores[rank - 1];
    std::tie(r.tpr, r.fpr) = rates_at(r.threshold);

    std::vector<double> candidates;
    candidates.reserve(np + nf);
    candidates.insert(candidates.end(), pristine_scores.begin(), pristine_scores.end());
    candidates.insert(candidates.end(), forged_scores.begin(), forged_scores.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double thr : candidates) {
        const auto [tpr, fpr] = rates_at(thr);
        r.roc.push_back({thr, tpr, fpr});
    }
    return r;
}

}  // namespace vface
