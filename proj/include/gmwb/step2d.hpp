#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gmwb/contract.hpp"
#include "gmwb/math.hpp"
#include "gmwb/model.hpp"
#include "gmwb/parallel.hpp"
#include "gmwb/quadrature.hpp"
#include "gmwb/surface.hpp"

namespace gmwb {

struct TerminalPayoff {
    enum Kind { wealth_floor, call, put } kind = wealth_floor;
    double a = 0.0; // floor value, or strike

    double operator()(double w) const {
        switch (kind) {
            case wealth_floor: return w > a ? w : a;
            case call: return w > a ? w - a : 0.0;
            default: return w < a ? a - w : 0.0;
        }
    }
    double at_zero() const { return kind == call ? 0.0 : a; }
};

namespace detail {

// One (i, j) quadrature pair at one destination rate node: the r-direction
// row mix is fixed, and the X-direction target is the source grid shifted by
// a constant (p + u) nodes, so interior destinations share one 4-tap stencil.
struct QuadPoint {
    double wq = 0.0;    // lambda_i lambda_j / pi
    double rprime = 0.0;
    RowMix rows;
    int p = 0;
    double sfrac = 0.0; // p + u
    double xw[4] = {0, 0, 0, 0};
};

struct StepContext2D {
    Grids2D g;
    TransitionMoments tm;
    QuadratureRule rule1, rule2;
    double tau_x = 0.0, tau_r = 0.0;
    std::vector<double> bond;    // per rate node, one (sub)period
    std::vector<double> mu_r;    // conditional mean of r' per rate node
    std::vector<double> xshift;  // mu_x intercept + slope * r_k per rate node
    std::vector<double> ex, er, wq; // standardized excursions and weight per (i, j)
    std::vector<QuadPoint> qp;   // (K+1) * q1 * q2, k-major, i-outer / j-inner
    int q1 = 0, q2 = 0;

    const QuadPoint* at(int k) const { return qp.data() + static_cast<std::size_t>(k) * q1 * q2; }
};

inline StepContext2D make_step_context(const ModelParams& p, const TransitionMoments& tm,
                                       const Grids2D& g, int q1, int q2, QuadMap map) {
    StepContext2D c;
    c.g = g;
    c.tm = tm;
    c.q1 = q1;
    c.q2 = q2;
    c.rule1 = gauss_hermite(q1);
    c.rule2 = gauss_hermite(q2);
    c.tau_x = std::sqrt(tm.tau_x2);
    c.tau_r = std::sqrt(tm.tau_r2);
    const MapCoefficients mc = map_coefficients(map, tm.rho_xr);

    const int K = g.r.n;
    const BondCoefficients bc = bond_coefficients(p, tm.delta_n);
    c.bond.resize(K + 1);
    c.mu_r.resize(K + 1);
    c.xshift.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        const double rk = g.r.at(k);
        c.bond[k] = std::exp(bc.A - rk * bc.B);
        c.mu_r[k] = tm.mu_r_intercept + tm.mu_r_slope * rk;
        c.xshift[k] = tm.mu_x_intercept + tm.mu_x_slope_r * rk;
    }

    const int nq = q1 * q2;
    c.ex.resize(nq);
    c.er.resize(nq);
    c.wq.resize(nq);
    for (int i = 0; i < q1; ++i) {
        for (int j = 0; j < q2; ++j) {
            const int t = i * q2 + j;
            const double xi = c.rule1.nodes[i], xj = c.rule2.nodes[j];
            c.ex[t] = sqrt2 * c.tau_x * (mc.y1_i * xi + mc.y1_j * xj);
            c.er[t] = sqrt2 * c.tau_r * (mc.y2_i * xi + mc.y2_j * xj);
            c.wq[t] = c.rule1.weights[i] * c.rule2.weights[j] / (sqrt_pi * sqrt_pi);
        }
    }

    c.qp.resize(static_cast<std::size_t>(K + 1) * nq);
    std::size_t idx = 0;
    for (int k = 0; k <= K; ++k) {
        for (int t = 0; t < nq; ++t, ++idx) {
            QuadPoint& q = c.qp[idx];
            q.wq = c.wq[t];
            q.rprime = c.mu_r[k] + c.er[t];
            q.rows = row_mix(g.r, q.rprime);
            q.sfrac = (c.xshift[k] + c.ex[t]) / g.X.h;
            q.p = static_cast<int>(std::floor(q.sfrac));
            const double u = q.sfrac - q.p;
            const double A = 1.0 - u, B = u;
            const double a1 = (A * A * A - A) / 6.0;
            const double a2 = (B * B * B - B) / 6.0;
            q.xw[0] = a1;
            q.xw[1] = A - 2.0 * a1 + a2;
            q.xw[2] = B + a1 - 2.0 * a2;
            q.xw[3] = a2;
        }
    }
    return c;
}

[[noreturn]] inline void report_non_finite(const StepContext2D& c, const ValueSurface& src, int m,
                                           int k) {
    // locate the offending quadrature point for the diagnostic
    int bi = -1, bj = -1;
    const QuadPoint* qs = c.at(k);
    for (int i = 0; i < c.q1 && bi < 0; ++i)
        for (int j = 0; j < c.q2; ++j) {
            const QuadPoint& q = qs[i * c.q2 + j];
            double val = 0.0;
            for (int rr = 0; rr < 4; ++rr) {
                if (q.rows.w[rr] == 0.0) continue;
                const int kk = q.rows.base + rr;
                val += q.rows.w[rr] * eval_row(src.row(kk), src.M, c.g.X.h, src.zero[kk], m + q.sfrac);
            }
            if (!finite(val)) {
                bi = i;
                bj = j;
                break;
            }
        }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "expectation_step: non-finite value at node (m=%d, k=%d), quadrature point (i=%d, j=%d)",
                  m, k, bi, bj);
    throw std::runtime_error(buf);
}

// Backward expectation of one surface over one (sub)period: destination row
// k accumulates sum_ij wq * Q(X_m + shift, r'); interior columns go through
// the shared sliding stencil, edge columns through the policy-aware path.
inline void step_row(const StepContext2D& c, const ValueSurface& src, ValueSurface& dst, int k) {
    const int M = c.g.X.n;
    double* out = dst.row(k);
    for (int m = 0; m <= M; ++m) out[m] = 0.0;

    const QuadPoint* qs = c.at(k);
    const int nq = c.q1 * c.q2;
    for (int t = 0; t < nq; ++t) {
        const QuadPoint& q = qs[t];
        int mlo = 1 - q.p;
        if (mlo < 0) mlo = 0;
        int mhi = M - 2 - q.p;
        if (mhi > M) mhi = M;

        for (int m = 0; m < mlo && m <= M; ++m) {
            double val = 0.0;
            for (int rr = 0; rr < 4; ++rr) {
                if (q.rows.w[rr] == 0.0) continue;
                const int kk = q.rows.base + rr;
                val += q.rows.w[rr] * eval_row(src.row(kk), M, c.g.X.h, src.zero[kk], m + q.sfrac);
            }
            out[m] += q.wq * val;
        }
        for (int rr = 0; rr < 4; ++rr) {
            if (q.rows.w[rr] == 0.0) continue;
            const double cw = q.wq * q.rows.w[rr];
            const double* f = src.row(q.rows.base + rr) + q.p - 1;
            const double w0 = q.xw[0], w1 = q.xw[1], w2 = q.xw[2], w3 = q.xw[3];
            for (int m = mlo; m <= mhi; ++m)
                out[m] += cw * (w0 * f[m] + w1 * f[m + 1] + w2 * f[m + 2] + w3 * f[m + 3]);
        }
        for (int m = (mhi + 1 > mlo ? mhi + 1 : mlo); m <= M; ++m) {
            double val = 0.0;
            for (int rr = 0; rr < 4; ++rr) {
                if (q.rows.w[rr] == 0.0) continue;
                const int kk = q.rows.base + rr;
                val += q.rows.w[rr] * eval_row(src.row(kk), M, c.g.X.h, src.zero[kk], m + q.sfrac);
            }
            out[m] += q.wq * val;
        }
    }
    const double pk = c.bond[k];
    for (int m = 0; m <= M; ++m) {
        out[m] *= pk;
        if (!finite(out[m])) report_non_finite(c, src, m, k);
    }

    // zero-wealth track: 1-d quadrature over the r marginal
    double z = 0.0;
    for (int i = 0; i < c.q1; ++i)
        z += c.rule1.weights[i] * eval_zero(src, c.g, c.mu_r[k] + sqrt2 * c.tau_r * c.rule1.nodes[i]);
    dst.zero[k] = pk * z / sqrt_pi;
}

inline void expectation_step(const StepContext2D& c, const ValueSurface& src, ValueSurface& dst,
                             int threads) {
    dst.guarantee_level = src.guarantee_level;
    parallel_for(static_cast<std::size_t>(c.g.r.n) + 1, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) step_row(c, src, dst, static_cast<int>(k));
    });
}

// First backward step: the terminal payoff is analytic, so quadrature points
// evaluate it directly instead of interpolating a terminal surface.
inline void analytic_step(const StepContext2D& c, const std::vector<TerminalPayoff>& payoffs,
                          std::vector<ValueSurface>& dst, int threads) {
    const int M = c.g.X.n;
    const int K = c.g.r.n;
    const std::size_t ns = payoffs.size();
    parallel_for(static_cast<std::size_t>(K) + 1, threads, [&](std::size_t klo, std::size_t khi) {
        std::vector<double> wvals(M + 1);
        for (std::size_t k = klo; k < khi; ++k) {
            for (std::size_t s = 0; s < ns; ++s) {
                double* out = dst[s].row(static_cast<int>(k));
                for (int m = 0; m <= M; ++m) out[m] = 0.0;
            }
            const QuadPoint* qs = c.at(static_cast<int>(k));
            const int nq = c.q1 * c.q2;
            for (int t = 0; t < nq; ++t) {
                const QuadPoint& q = qs[t];
                for (int m = 0; m <= M; ++m)
                    wvals[m] = c.g.W0 * std::exp(c.g.X.at(m) + q.sfrac * c.g.X.h);
                for (std::size_t s = 0; s < ns; ++s) {
                    const TerminalPayoff& tp = payoffs[s];
                    double* out = dst[s].row(static_cast<int>(k));
                    if (tp.kind == TerminalPayoff::wealth_floor) {
                        const double floor_v = tp.a;
                        for (int m = 0; m <= M; ++m)
                            out[m] += q.wq * (wvals[m] > floor_v ? wvals[m] : floor_v);
                    } else {
                        for (int m = 0; m <= M; ++m) out[m] += q.wq * tp(wvals[m]);
                    }
                }
            }
            const double pk = c.bond[k];
            for (std::size_t s = 0; s < ns; ++s) {
                double* out = dst[s].row(static_cast<int>(k));
                for (int m = 0; m <= M; ++m) out[m] *= pk;
                dst[s].zero[k] = pk * payoffs[s].at_zero();
            }
        }
    });
}

// Final backward step to a single state (x_star in absolute X units, r_star).
inline double point_step(const StepContext2D& c, const ModelParams& p, const ValueSurface& src,
                         double x_star, double r_star) {
    const double mu_r = c.tm.mu_r_intercept + c.tm.mu_r_slope * r_star;
    const double shift = c.tm.mu_x_intercept + c.tm.mu_x_slope_r * r_star;
    double acc = 0.0;
    const int nq = c.q1 * c.q2;
    for (int t = 0; t < nq; ++t) {
        const double t_x = (x_star + shift + c.ex[t] - c.g.X.x0) / c.g.X.h;
        acc += c.wq[t] * eval_xr(src, c.g, t_x, mu_r + c.er[t]);
    }
    return bond_price(p, r_star, 0.0, c.tm.delta_n) * acc;
}

inline double point_step_analytic(const StepContext2D& c, const ModelParams& p,
                                  const TerminalPayoff& tp, double x_star, double r_star) {
    const double shift = c.tm.mu_x_intercept + c.tm.mu_x_slope_r * r_star;
    double acc = 0.0;
    const int nq = c.q1 * c.q2;
    for (int t = 0; t < nq; ++t)
        acc += c.wq[t] * tp(c.g.W0 * std::exp(x_star + shift + c.ex[t]));
    return bond_price(p, r_star, 0.0, c.tm.delta_n) * acc;
}

} // namespace detail

// Static jump at a withdrawal date: Q^-(W, r) = C_n(G) + Q^+(max(W - G, 0), r),
// with the 1-d interpolation in X folded into per-column taps.
inline void apply_jump_static(const Grids2D& g, const GMWBContract& c, int date_n,
                              const ValueSurface& src, ValueSurface& dst,
                              const std::vector<XTarget>& taps, int threads) {
    const double cash = cashflow(c, date_n, c.contractual_amount());
    const int M = g.X.n, K = g.r.n;
    dst.guarantee_level = src.guarantee_level;
    parallel_for(static_cast<std::size_t>(K) + 1, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            const double* f = src.row(static_cast<int>(k));
            double* out = dst.row(static_cast<int>(k));
            const double zv = src.zero[k];
            for (int m = 0; m <= M; ++m) out[m] = cash + eval_x_target(taps[m], f, zv);
            dst.zero[k] = cash + zv;
        }
    });
}

inline std::vector<XTarget> static_jump_taps(const Grids2D& g, double gamma) {
    std::vector<XTarget> taps(g.X.n + 1);
    for (int m = 0; m <= g.X.n; ++m)
        taps[m] = x_target(g, g.W0 * std::exp(g.X.at(m)) - gamma);
    return taps;
}

inline ValueSurface apply_jump_static(const ValueSurface& src, const GMWBContract& c, int date_n,
                                      const Grids2D& g, int threads = 1) {
    ValueSurface dst;
    dst.resize(src.M, src.K);
    apply_jump_static(g, c, date_n, src, dst, static_jump_taps(g, c.contractual_amount()), threads);
    return dst;
}

// Candidate withdrawals on the guarantee grid: gamma = d * spacing,
// d = 0..j.  Ties within 1e-12 resolve to the smaller withdrawal.
struct DynamicJumpTable {
    std::vector<XTarget> taps; // (M+1) x (J-1), taps for d = 1..J-1
    std::vector<double> cash;  // cash[d], d = 0..J-1
    int J = 0;

    const XTarget& tap(int m, int d) const {
        return taps[static_cast<std::size_t>(m) * (J - 1) + (d - 1)];
    }
};

inline DynamicJumpTable make_dynamic_jump_table(const Grids2D& g, const GMWBContract& c,
                                                const GuaranteeGrid& ag, int date_n) {
    DynamicJumpTable t;
    t.J = ag.J;
    t.cash.resize(ag.J);
    for (int d = 0; d < ag.J; ++d) t.cash[d] = cashflow(c, date_n, d * ag.spacing);
    t.taps.resize(static_cast<std::size_t>(g.X.n + 1) * (ag.J - 1));
    for (int m = 0; m <= g.X.n; ++m) {
        const double Wm = g.W0 * std::exp(g.X.at(m));
        for (int d = 1; d < ag.J; ++d)
            t.taps[static_cast<std::size_t>(m) * (ag.J - 1) + (d - 1)] = x_target(g, Wm - d * ag.spacing);
    }
    return t;
}

constexpr double jump_tie_tolerance = 1e-12;

// Discrete dynamic jump: Q^-(W_m, r_k, A_j) = max over i <= j of
// [Q^+(max(W_m - A_j + A_i, 0), r_k, A_i) + C_n(A_j - A_i)].
// `actions`, when non-null, records the maximizing d = j - i per node.
inline void apply_jump_dynamic(const Grids2D& g, const DynamicJumpTable& t,
                               const std::vector<ValueSurface>& src, std::vector<ValueSurface>& dst,
                               int threads, std::vector<std::uint16_t>* actions = nullptr) {
    const int M = g.X.n, K = g.r.n, J = t.J;
    const std::size_t rows = static_cast<std::size_t>(J) * (K + 1);
    parallel_for(rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t it = lo; it < hi; ++it) {
            const int j = static_cast<int>(it / (K + 1));
            const int k = static_cast<int>(it % (K + 1));
            double* out = dst[j].row(k);
            std::uint16_t* act =
                actions ? actions->data() + (static_cast<std::size_t>(j) * (K + 1) + k) * (M + 1)
                        : nullptr;
            const double* f_self = src[j].row(k);
            for (int m = 0; m <= M; ++m) {
                double best = f_self[m]; // d = 0: no withdrawal
                int best_d = 0;
                for (int d = 1; d <= j; ++d) {
                    const int i = j - d;
                    const double val =
                        eval_x_target(t.tap(m, d), src[i].row(k), src[i].zero[k]) + t.cash[d];
                    if (val > best + jump_tie_tolerance) {
                        best = val;
                        best_d = d;
                    }
                }
                out[m] = best;
                if (act) act[m] = static_cast<std::uint16_t>(best_d);
            }
            double zbest = src[j].zero[k];
            for (int d = 1; d <= j; ++d) {
                const double val = src[j - d].zero[k] + t.cash[d];
                if (val > zbest + jump_tie_tolerance) zbest = val;
            }
            dst[j].zero[k] = zbest;
            dst[j].guarantee_level = src[j].guarantee_level;
        }
    });
}

} // namespace gmwb
