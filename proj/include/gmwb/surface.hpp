#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "gmwb/math.hpp"
#include "gmwb/model.hpp"
#include "gmwb/spline.hpp"

namespace gmwb {

struct Axis {
    double x0 = 0.0;
    double h = 1.0;
    int n = 0; // interval count; nodes 0..n
    double at(int i) const { return x0 + h * i; }
    double hi() const { return x0 + h * n; }
    double to_units(double x) const { return (x - x0) / h; }
};

// Working grids: X = ln(W / W(0)) and the short rate r.
struct Grids2D {
    Axis X;
    Axis r;
    double W0 = 1.0;
};

// Discretized value function for one guarantee level.  Row k holds the
// X-profile at rate node r_k; `zero` is the explicit W = 0 track (wealth
// absorbed at zero, value still rate-dependent through discounting).
struct ValueSurface {
    double guarantee_level = 0.0;
    double time_label = 0.0;
    int M = 0, K = 0;
    std::vector<double> v;    // (K+1) x (M+1), row-major in k
    std::vector<double> zero; // K+1

    void resize(int M_, int K_) {
        M = M_;
        K = K_;
        v.assign(static_cast<std::size_t>(K + 1) * (M + 1), 0.0);
        zero.assign(K + 1, 0.0);
    }
    double* row(int k) { return v.data() + static_cast<std::size_t>(k) * (M + 1); }
    const double* row(int k) const { return v.data() + static_cast<std::size_t>(k) * (M + 1); }
    double& at(int m, int k) { return v[static_cast<std::size_t>(k) * (M + 1) + m]; }
    double at(int m, int k) const { return v[static_cast<std::size_t>(k) * (M + 1) + m]; }
};

// X-profile evaluation at fractional node position t with the engine's
// out-of-grid policies: below the grid the value is linear in W between the
// zero-wealth value and the first node; above, linear in X with the
// one-sided spline slope.
inline double eval_row(const double* f, int M, double hX, double zero_val, double t) {
    if (t < 0.0) {
        return zero_val + (f[0] - zero_val) * std::exp(t * hX); // W'/W_min
    }
    if (t > static_cast<double>(M)) {
        const double sl = (f[M] - f[M - 1]) + 0.5 * (f[M - 2] - 2.0 * f[M - 1] + f[M]);
        return f[M] + (t - M) * sl;
    }
    const Stencil4 s = spline_stencil(M, t);
    return s.w[0] * f[s.base] + s.w[1] * f[s.base + 1] + s.w[2] * f[s.base + 2] + s.w[3] * f[s.base + 3];
}

// Row indices and weights of the r-direction combination at rate r; outside
// the grid the two boundary rows continue linearly (the grid is built wide
// enough that quadrature mass out there is negligible).
struct RowMix {
    int base = 0;
    double w[4] = {0.0, 0.0, 0.0, 0.0};
};

inline RowMix row_mix(const Axis& r_axis, double r) {
    const int K = r_axis.n;
    const double tr = r_axis.to_units(r);
    RowMix rm;
    if (tr < 0.0) {
        rm.base = 0;
        rm.w[0] = 1.0 - tr;
        rm.w[1] = tr;
    } else if (tr > static_cast<double>(K)) {
        rm.base = K - 3;
        rm.w[2] = -(tr - K);
        rm.w[3] = 1.0 + (tr - K);
    } else {
        const Stencil4 s = spline_stencil(K, tr);
        rm.base = s.base;
        rm.w[0] = s.w[0];
        rm.w[1] = s.w[1];
        rm.w[2] = s.w[2];
        rm.w[3] = s.w[3];
    }
    return rm;
}

// Full 2-d evaluation with all boundary policies; t_x in X node units.
inline double eval_xr(const ValueSurface& s, const Grids2D& g, double t_x, double r) {
    const RowMix rm = row_mix(g.r, r);
    double out = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (rm.w[i] == 0.0) continue;
        const int k = rm.base + i;
        out += rm.w[i] * eval_row(s.row(k), s.M, g.X.h, s.zero[k], t_x);
    }
    return out;
}

// Zero-wealth track evaluated at rate r (1-d spline in r, linear tails).
inline double eval_zero(const ValueSurface& s, const Grids2D& g, double r) {
    const int K = s.K;
    const double tr = g.r.to_units(r);
    const double* z = s.zero.data();
    if (tr < 0.0) return z[0] + tr * (z[1] - z[0]);
    if (tr > static_cast<double>(K)) return z[K] + (tr - K) * (z[K] - z[K - 1]);
    const Stencil4 st = spline_stencil(K, tr);
    return st.w[0] * z[st.base] + st.w[1] * z[st.base + 1] + st.w[2] * z[st.base + 2] +
           st.w[3] * z[st.base + 3];
}

// Classified X-direction read for a fixed wealth target (used by the jump
// condition, where the post-withdrawal wealth is known per node).
struct XTarget {
    enum Kind { zero_track, below_grid, spline } kind = zero_track;
    double ratio = 0.0; // W'/W_min for below_grid
    Stencil4 st;
};

inline XTarget x_target(const Axis& X, double W0, double W_prime) {
    XTarget t;
    if (W_prime <= 0.0) {
        t.kind = XTarget::zero_track;
        return t;
    }
    const double x = std::log(W_prime / W0);
    const double tx = X.to_units(x);
    if (tx < 0.0) {
        t.kind = XTarget::below_grid;
        t.ratio = W_prime / (W0 * std::exp(X.x0));
        return t;
    }
    t.kind = XTarget::spline;
    if (tx > static_cast<double>(X.n)) {
        // above the wealth grid: fold the linear continuation
        // f[M] + e * ((f[M] - f[M-1]) + 0.5 (f[M-2] - 2 f[M-1] + f[M])) into 3 taps
        const int M = X.n;
        const double e = tx - M;
        t.st.base = M - 3;
        t.st.w[1] = 0.5 * e;
        t.st.w[2] = -2.0 * e;
        t.st.w[3] = 1.0 + 1.5 * e;
        return t;
    }
    t.st = spline_stencil(X.n, tx);
    return t;
}

inline XTarget x_target(const Grids2D& g, double W_prime) { return x_target(g.X, g.W0, W_prime); }

inline double eval_x_target(const XTarget& t, const double* row, double zero_val) {
    switch (t.kind) {
        case XTarget::zero_track: return zero_val;
        case XTarget::below_grid: return zero_val + (row[0] - zero_val) * t.ratio;
        default:
            return t.st.w[0] * row[t.st.base] + t.st.w[1] * row[t.st.base + 1] +
                   t.st.w[2] * row[t.st.base + 2] + t.st.w[3] * row[t.st.base + 3];
    }
}

} // namespace gmwb
