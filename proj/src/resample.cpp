#include "vface/resample.hpp"

#include <cmath>
#include <stdexcept>

namespace vface {

AffineParams AffineParams::inverse() const {
    const double det = determinant();
    if (det == 0.0 || !std::isfinite(det))
        throw std::invalid_argument("affine map is not invertible");
    AffineParams inv;
    inv.a1 = b2 / det;
    inv.a2 = -a2 / det;
    inv.b1 = -b1 / det;
    inv.b2 = a1 / det;
    inv.a0 = -(inv.a1 * a0 + inv.a2 * b0);
    inv.b0 = -(inv.b1 * a0 + inv.b2 * b0);
    return inv;
}

AffineParams AffineParams::rotation_deg(double degrees) {
    const double t = degrees * M_PI / 180.0;
    double c = std::cos(t), s = std::sin(t);
    const double r = std::fmod(degrees, 90.0);
    if (r == 0.0) {  // snap exact quarter turns
        c = std::round(c);
        s = std::round(s);
    }
    return {0.0, c, s, 0.0, -s, c};
}

std::pair<double, double> affine_apply(const AffineParams& p, double x, double y) {
    return {p.a0 + p.a1 * x + p.a2 * y, p.b0 + p.b1 * x + p.b2 * y};
}

double KernelSpec::support() const {
    switch (kind) {
        case KernelKind::nearest: return 0.5;
        case KernelKind::linear: return 1.0;
        case KernelKind::cubic: return 2.0;
    }
    return 0.0;
}

double kernel_value(const KernelSpec& spec, double t) {
    switch (spec.kind) {
        case KernelKind::nearest:
            return (t >= -0.5 && t < 0.5) ? 1.0 : 0.0;
        case KernelKind::linear: {
            const double s = std::abs(t);
            return s < 1.0 ? 1.0 - s : 0.0;
        }
        case KernelKind::cubic: {
            const double a = spec.cubic_a;
            const double s = std::abs(t);
            if (s < 1.0)
                return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
            if (s < 2.0)
                return (((s - 5.0) * s + 8.0) * s - 4.0) * a;
            return 0.0;
        }
    }
    return 0.0;
}

double kernel_derivative(const KernelSpec& spec, int n, double t) {
    if (n != 1 && n != 2)
        throw std::invalid_argument("kernel_derivative: order must be 1 or 2");
    switch (spec.kind) {
        case KernelKind::nearest:
            // piecewise constant: zero away from the knots, right-limit at them
            return 0.0;
        case KernelKind::linear: {
            if (n == 2) return 0.0;
            // slope of the tent, pieces half-open to the right
            if (t >= -1.0 && t < 0.0) return 1.0;
            if (t >= 0.0 && t < 1.0) return -1.0;
            return 0.0;
        }
        case KernelKind::cubic: {
            const double a = spec.cubic_a;
            // pieces [−2,−1), [−1,0), [0,1), [1,2); mirror via |t| with the
            // right-limit convention carried by the half-open bounds on t
            const double s = std::abs(t);
            const bool inner = t >= -1.0 && t < 1.0;
            const bool outer = !inner && t >= -2.0 && t < 2.0;
            if (!inner && !outer) return 0.0;
            double d;
            if (n == 1) {
                d = inner ? (3.0 * (a + 2.0) * s - 2.0 * (a + 3.0)) * s
                          : (3.0 * a * s - 10.0 * a) * s + 8.0 * a;
                if (t < 0.0) d = -d;  // w even, first derivative odd
            } else {
                d = inner ? 6.0 * (a + 2.0) * s - 2.0 * (a + 3.0)
                          : 6.0 * a * s - 10.0 * a;
            }
            return d;
        }
    }
    return 0.0;
}

double interpolate_1d(const Signal& signal, const KernelSpec& spec, double x) {
    const long n = signal.samples.size();
    if (n == 0) throw std::invalid_argument("interpolate_1d: empty signal");
    if (!(signal.step > 0.0)) throw std::invalid_argument("interpolate_1d: step must be positive");
    const double u = x / signal.step;
    const double r = spec.support();
    const long k0 = static_cast<long>(std::floor(u - r)) - 1;
    const long k1 = static_cast<long>(std::ceil(u + r)) + 1;
    double acc = 0.0;
    for (long k = k0; k <= k1; ++k) {
        const double w = kernel_value(spec, u - static_cast<double>(k));
        if (w == 0.0) continue;
        const long kc = k < 0 ? 0 : (k >= n ? n - 1 : k);
        acc += signal.samples[kc] * w;
    }
    return acc;
}

namespace {

// Separable 2-D sample at (u,v) in source pixel coordinates, edge clamped.
double sample2d(const Image& src, const KernelSpec& spec, double u, double v) {
    const long w = src.cols(), h = src.rows();
    const double r = spec.support();
    const long j0 = static_cast<long>(std::floor(v - r)) - 1;
    const long j1 = static_cast<long>(std::ceil(v + r)) + 1;
    const long i0 = static_cast<long>(std::floor(u - r)) - 1;
    const long i1 = static_cast<long>(std::ceil(u + r)) + 1;
    double acc = 0.0;
    for (long j = j0; j <= j1; ++j) {
        const double wy = kernel_value(spec, v - static_cast<double>(j));
        if (wy == 0.0) continue;
        const long jc = j < 0 ? 0 : (j >= h ? h - 1 : j);
        double row = 0.0;
        for (long i = i0; i <= i1; ++i) {
            const double wx = kernel_value(spec, u - static_cast<double>(i));
            if (wx == 0.0) continue;
            const long ic = i < 0 ? 0 : (i >= w ? w - 1 : i);
            row += src(jc, ic) * wx;
        }
        acc += wy * row;
    }
    return acc;
}

}  // namespace

Image warp(const Image& src, const AffineParams& params, const KernelSpec& spec,
           int out_width, int out_height) {
    if (out_width < 1 || out_height < 1)
        throw std::invalid_argument("warp: output size must be positive");
    const AffineParams inv = params.inverse();
    Image out(out_height, out_width);
    for (int y = 0; y < out_height; ++y) {
        for (int x = 0; x < out_width; ++x) {
            const auto [u, v] = affine_apply(inv, x, y);
            out(y, x) = sample2d(src, spec, u, v);
        }
    }
    return out;
}

double predicted_variance(const KernelSpec& spec, int n, const NoiseModel& noise, double phase) {
    if (!(noise.sigma2 > 0.0))
        throw std::invalid_argument("predicted_variance: sigma2 must be positive");
    const double t0 = phase - std::floor(phase);
    const int reach = static_cast<int>(std::ceil(spec.support())) + 1;
    double sum = 0.0;
    for (int k = -reach; k <= reach; ++k) {
        const double d = kernel_derivative(spec, n, t0 - static_cast<double>(k));
        sum += d * d;
    }
    return noise.sigma2 * sum;
}

}  // namespace vface
