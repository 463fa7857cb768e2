#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gmwb/contract.hpp"
#include "gmwb/math.hpp"
#include "gmwb/parallel.hpp"
#include "gmwb/quadrature.hpp"
#include "gmwb/step2d.hpp"
#include "gmwb/surface.hpp"

namespace gmwb {

// Deterministic-rate engine: the r dimension collapses and the backward
// recursion is a 1-d Gauss-Hermite sweep in X with per-step discounting
// taken from the deterministic rate path.
struct Grids1D {
    Axis X;
    double W0 = 1.0;
};

struct Surface1D {
    double guarantee_level = 0.0;
    std::vector<double> v; // M+1
    double zero = 0.0;
};

namespace detail {

struct StepContext1D {
    Grids1D g;
    QuadratureRule rule;
    double tau_x = 0.0;
    // per sub-step s = 1..total: discount e^{-int r_det} and ln W drift
    std::vector<double> discount;
    std::vector<double> drift;
};

// Rate integrals of r_det(t) = theta + (r0 - theta) e^{-kappa t} over each
// sub-step; constant_r0 uses r_det == r0 (the paper's deterministic case).
inline std::vector<double> rate_integrals(const ModelParams& p, double delta, int total,
                                          bool constant_r0) {
    std::vector<double> out(total + 1, 0.0);
    for (int s = 1; s <= total; ++s) {
        if (constant_r0) {
            out[s] = p.r0 * delta;
        } else {
            const double t0 = (s - 1) * delta, t1 = s * delta;
            out[s] = p.theta * delta +
                     (p.r0 - p.theta) * (std::exp(-p.kappa * t0) - std::exp(-p.kappa * t1)) / p.kappa;
        }
    }
    return out;
}

inline StepContext1D make_step_context_1d(const ModelParams& p, double alpha, double delta,
                                          int total, const Grids1D& g, int q1, bool constant_r0) {
    StepContext1D c;
    c.g = g;
    c.rule = gauss_hermite(q1);
    c.tau_x = p.sigma_S * std::sqrt(delta);
    const std::vector<double> ri = rate_integrals(p, delta, total, constant_r0);
    c.discount.resize(total + 1);
    c.drift.resize(total + 1);
    for (int s = 1; s <= total; ++s) {
        c.discount[s] = std::exp(-ri[s]);
        c.drift[s] = ri[s] - (alpha + 0.5 * p.sigma_S * p.sigma_S) * delta;
    }
    return c;
}

inline void expectation_step_1d(const StepContext1D& c, int s, const Surface1D& src,
                                Surface1D& dst) {
    const int M = c.g.X.n;
    const int q = c.rule.order;
    for (int m = 0; m <= M; ++m) {
        double acc = 0.0;
        for (int i = 0; i < q; ++i) {
            const double t = m + (c.drift[s] + sqrt2 * c.tau_x * c.rule.nodes[i]) / c.g.X.h;
            acc += c.rule.weights[i] * eval_row(src.v.data(), M, c.g.X.h, src.zero, t);
        }
        dst.v[m] = c.discount[s] * acc / sqrt_pi;
        if (!finite(dst.v[m])) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "expectation_step_1d: non-finite value at node m=%d", m);
            throw std::runtime_error(buf);
        }
    }
    dst.zero = c.discount[s] * src.zero;
    dst.guarantee_level = src.guarantee_level;
}

inline void analytic_step_1d(const StepContext1D& c, int s, const TerminalPayoff& tp,
                             Surface1D& dst) {
    const int M = c.g.X.n;
    const int q = c.rule.order;
    for (int m = 0; m <= M; ++m) {
        double acc = 0.0;
        for (int i = 0; i < q; ++i) {
            const double w =
                c.g.W0 * std::exp(c.g.X.at(m) + c.drift[s] + sqrt2 * c.tau_x * c.rule.nodes[i]);
            acc += c.rule.weights[i] * tp(w);
        }
        dst.v[m] = c.discount[s] * acc / sqrt_pi;
    }
    dst.zero = c.discount[s] * tp.at_zero();
}

inline double point_step_1d(const StepContext1D& c, int s, const Surface1D& src, double x_star) {
    double acc = 0.0;
    for (int i = 0; i < c.rule.order; ++i) {
        const double t =
            (x_star + c.drift[s] + sqrt2 * c.tau_x * c.rule.nodes[i] - c.g.X.x0) / c.g.X.h;
        acc += c.rule.weights[i] * eval_row(src.v.data(), c.g.X.n, c.g.X.h, src.zero, t);
    }
    return c.discount[s] * acc / sqrt_pi;
}

inline double point_step_analytic_1d(const StepContext1D& c, int s, const TerminalPayoff& tp,
                                     double x_star) {
    double acc = 0.0;
    for (int i = 0; i < c.rule.order; ++i)
        acc += c.rule.weights[i] *
               tp(c.g.W0 * std::exp(x_star + c.drift[s] + sqrt2 * c.tau_x * c.rule.nodes[i]));
    return c.discount[s] * acc / sqrt_pi;
}

inline void apply_jump_static_1d(const Grids1D& g, const GMWBContract& c, int date_n,
                                 const Surface1D& src, Surface1D& dst,
                                 const std::vector<XTarget>& taps) {
    const double cash = cashflow(c, date_n, c.contractual_amount());
    for (int m = 0; m <= g.X.n; ++m)
        dst.v[m] = cash + eval_x_target(taps[m], src.v.data(), src.zero);
    dst.zero = cash + src.zero;
    dst.guarantee_level = src.guarantee_level;
}

inline void apply_jump_dynamic_1d(const Grids1D& g, const DynamicJumpTable& t,
                                  const std::vector<Surface1D>& src, std::vector<Surface1D>& dst,
                                  int threads) {
    const int M = g.X.n, J = t.J;
    parallel_for(static_cast<std::size_t>(J), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            for (int m = 0; m <= M; ++m) {
                double best = src[j].v[m];
                for (int d = 1; d <= static_cast<int>(j); ++d) {
                    const int i = static_cast<int>(j) - d;
                    const double val =
                        eval_x_target(t.tap(m, d), src[i].v.data(), src[i].zero) + t.cash[d];
                    if (val > best + jump_tie_tolerance) best = val;
                }
                dst[j].v[m] = best;
            }
            double zbest = src[j].zero;
            for (int d = 1; d <= static_cast<int>(j); ++d) {
                const double val = src[j - d].zero + t.cash[d];
                if (val > zbest + jump_tie_tolerance) zbest = val;
            }
            dst[j].zero = zbest;
            dst[j].guarantee_level = src[j].guarantee_level;
        }
    });
}

inline std::vector<XTarget> static_jump_taps_1d(const Grids1D& g, double gamma) {
    std::vector<XTarget> taps(g.X.n + 1);
    for (int m = 0; m <= g.X.n; ++m)
        taps[m] = x_target(g.X, g.W0, g.W0 * std::exp(g.X.at(m)) - gamma);
    return taps;
}

inline DynamicJumpTable make_dynamic_jump_table_1d(const Grids1D& g, const GMWBContract& c,
                                                   const GuaranteeGrid& ag, int date_n) {
    DynamicJumpTable t;
    t.J = ag.J;
    t.cash.resize(ag.J);
    for (int d = 0; d < ag.J; ++d) t.cash[d] = cashflow(c, date_n, d * ag.spacing);
    t.taps.resize(static_cast<std::size_t>(g.X.n + 1) * (ag.J - 1));
    for (int m = 0; m <= g.X.n; ++m) {
        const double Wm = g.W0 * std::exp(g.X.at(m));
        for (int d = 1; d < ag.J; ++d)
            t.taps[static_cast<std::size_t>(m) * (ag.J - 1) + (d - 1)] =
                x_target(g.X, g.W0, Wm - d * ag.spacing);
    }
    return t;
}

} // namespace detail
} // namespace gmwb
