#pragma once

#include "vface/raster.hpp"

#include <utility>

namespace vface {

// Forward affine map  x' = a0 + a1 x + a2 y,  y' = b0 + b1 x + b2 y.
struct AffineParams {
    double a0 = 0.0, a1 = 1.0, a2 = 0.0;
    double b0 = 0.0, b1 = 0.0, b2 = 1.0;

    double determinant() const { return a1 * b2 - a2 * b1; }

    // Throws std::invalid_argument on a singular map.
    AffineParams inverse() const;

    static AffineParams identity() { return {}; }
    static AffineParams scaling(double sx, double sy) { return {0.0, sx, 0.0, 0.0, 0.0, sy}; }
    // x' = x cos t + y sin t, y' = -x sin t + y cos t (x' axis rotated
    // counterclockwise from the x axis by t degrees).
    static AffineParams rotation_deg(double degrees);
    static AffineParams skew(double kx, double ky) { return {0.0, 1.0, kx, 0.0, ky, 1.0}; }
};

std::pair<double, double> affine_apply(const AffineParams& p, double x, double y);

enum class KernelKind { nearest, linear, cubic };

// Interpolation kernel. The cubic is the two-piece Keys polynomial with
// parameter cubic_a (Catmull-Rom at -0.5). Half-width of the support:
// nearest 0.5, linear 1, cubic 2.
struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double cubic_a = -0.5;

    double support() const;
};

// w(t); zero outside the support. Piecewise boundaries are half-open so the
// value at a knot is the right-limit (nearest: 1 on [-0.5, 0.5)).
double kernel_value(const KernelSpec& spec, double t);

// Analytic nth derivative of w at t, n in {1,2}. At a knot the right-limit
// is returned, making the function total.
double kernel_derivative(const KernelSpec& spec, int n, double t);

// Variance of the i.i.d. source samples feeding an interpolation.
struct NoiseModel {
    double sigma2 = 1.0;
};

// sum_k f_k w(x/step - k), out-of-range indices clamped to the edges.
double interpolate_1d(const Signal& signal, const KernelSpec& spec, double x);

// Inverse-mapping affine warp: each output pixel (x,y) samples the source at
// params.inverse()(x,y) with separable kernel interpolation and edge
// clamping. params is the forward source->output map.
Image warp(const Image& src, const AffineParams& params, const KernelSpec& spec,
           int out_width, int out_height);

// Closed-form variance of the nth kernel-derivative interpolation of unit
// white noise: sigma^2 * sum_k (D^n w(phase - k))^2. The phase is reduced
// mod 1 before summing, so any real argument is accepted and shifting the
// phase by an integer cannot change the result.
double predicted_variance(const KernelSpec& spec, int n, const NoiseModel& noise, double phase);

}  // namespace vface
