#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gmwb/math.hpp"

namespace gmwb {

// Four-tap weights of the uniform-grid cubic spline with three-point
// central-difference second derivatives.  Value at fractional position
// t in [0, n] (node units, n = interval count) is sum_c w[c] * f[base + c].
// The two boundary intervals copy the nearest interior second derivative.
// Requires n >= 3; all four taps are then in bounds.
struct Stencil4 {
    int base = 0;
    double w[4] = {0.0, 0.0, 0.0, 0.0};
};

inline Stencil4 spline_stencil(int n, double t) {
    int m = static_cast<int>(t);
    if (m > n - 1) m = n - 1;
    if (m < 0) m = 0;
    const double u = t - m;
    const double A = 1.0 - u, B = u;
    const double a1 = (A * A * A - A) / 6.0;
    const double a2 = (B * B * B - B) / 6.0;

    Stencil4 s;
    if (m == 0) {
        s.base = 0;
        s.w[0] = A + (a1 + a2);
        s.w[1] = B - 2.0 * (a1 + a2);
        s.w[2] = a1 + a2;
    } else if (m == n - 1) {
        s.base = n - 3;
        s.w[1] = a1 + a2;
        s.w[2] = A - 2.0 * (a1 + a2);
        s.w[3] = B + (a1 + a2);
    } else {
        s.base = m - 1;
        s.w[0] = a1;
        s.w[1] = A - 2.0 * a1 + a2;
        s.w[2] = B + a1 - 2.0 * a2;
        s.w[3] = a2;
    }
    return s;
}

enum class SplineKind { local, global_natural };

// Uniform-grid 1-d cubic spline.  The default "local" construction takes
// second derivatives from three-point central differences so a single
// evaluation touches only four neighboring nodes; the classical natural
// spline (global tridiagonal solve) is kept behind a flag for cross-checks.
class CubicSpline1D {
public:
    CubicSpline1D() = default;

    CubicSpline1D(double x0, double h, std::vector<double> values,
                  SplineKind kind = SplineKind::local)
        : x0_(x0), h_(h), f_(std::move(values)) {
        require(f_.size() >= 4, "CubicSpline1D: need at least 4 points");
        require(h_ > 0.0, "CubicSpline1D: step must be positive");
        const std::size_t n = f_.size() - 1;
        d_.assign(n + 1, 0.0);
        if (kind == SplineKind::local) {
            for (std::size_t i = 1; i < n; ++i) d_[i] = f_[i - 1] - 2.0 * f_[i] + f_[i + 1];
            d_[0] = d_[1];
            d_[n] = d_[n - 1];
        } else {
            // natural spline, d_i = M_i h^2:  d_{i-1} + 4 d_i + d_{i+1} = 6 (f_{i-1} - 2 f_i + f_{i+1})
            std::vector<double> cp(n, 0.0), dd(n, 0.0);
            cp[1] = 0.25;
            dd[1] = 6.0 * (f_[0] - 2.0 * f_[1] + f_[2]) * 0.25;
            for (std::size_t i = 2; i < n; ++i) {
                const double denom = 4.0 - cp[i - 1];
                cp[i] = 1.0 / denom;
                dd[i] = (6.0 * (f_[i - 1] - 2.0 * f_[i] + f_[i + 1]) - dd[i - 1]) / denom;
            }
            d_[n - 1] = dd[n - 1];
            for (std::size_t i = n - 2; i >= 1; --i) d_[i] = dd[i] - cp[i] * d_[i + 1];
        }
    }

    double x_min() const { return x0_; }
    double x_max() const { return x0_ + h_ * (f_.size() - 1); }
    double step() const { return h_; }
    std::size_t node_count() const { return f_.size(); }

    // Evaluation inside [x_min, x_max]; outside the grid the value is
    // continued linearly with the one-sided spline slope.
    double operator()(double x) const {
        const std::size_t n = f_.size() - 1;
        const double t = (x - x0_) / h_;
        if (t < 0.0) return f_[0] + t * ((f_[1] - f_[0]) - 0.5 * d_[1]);
        if (t > static_cast<double>(n)) return f_[n] + (t - n) * ((f_[n] - f_[n - 1]) + 0.5 * d_[n - 1]);
        std::size_t m = static_cast<std::size_t>(t);
        if (m > n - 1) m = n - 1;
        const double u = t - m;
        const double A = 1.0 - u, B = u;
        const double a1 = (A * A * A - A) / 6.0;
        const double a2 = (B * B * B - B) / 6.0;
        return A * f_[m] + B * f_[m + 1] + a1 * d_[m] + a2 * d_[m + 1];
    }

private:
    double x0_ = 0.0;
    double h_ = 1.0;
    std::vector<double> f_;
    std::vector<double> d_; // second derivatives times h^2
};

// 2-d evaluation on a uniform (x, y) grid stored row-major with the y index
// as the slow dimension: four 1-d splines along x at the neighboring y rows,
// then one 1-d spline across those values in y (16 grid points per query).
inline double spline2d_eval(std::span<const double> values, int nx, int ny,
                            double x0, double hx, double y0, double hy,
                            double x, double y) {
    require(nx >= 4 && ny >= 4, "spline2d_eval: need at least 4 nodes per axis");
    const int mx = nx - 1, my = ny - 1;
    const double tx = (x - x0) / hx;
    const double ty = (y - y0) / hy;
    require(tx >= 0.0 && tx <= mx && ty >= 0.0 && ty <= my, "spline2d_eval: point outside grid");

    const Stencil4 sx = spline_stencil(mx, tx);
    const Stencil4 sy = spline_stencil(my, ty);
    double out = 0.0;
    for (int r = 0; r < 4; ++r) {
        const double* row = values.data() + static_cast<std::size_t>(sy.base + r) * nx;
        double g = 0.0;
        for (int c = 0; c < 4; ++c) g += sx.w[c] * row[sx.base + c];
        out += sy.w[r] * g;
    }
    return out;
}

} // namespace gmwb
