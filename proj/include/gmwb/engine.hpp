#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gmwb/contract.hpp"
#include "gmwb/math.hpp"
#include "gmwb/model.hpp"
#include "gmwb/parallel.hpp"
#include "gmwb/step1d.hpp"
#include "gmwb/step2d.hpp"
#include "gmwb/surface.hpp"
#include "gmwb/vanilla.hpp"

namespace gmwb {

enum class WithdrawalStrategy { Static, Dynamic };
enum class RateModel { Stochastic, Deterministic };

struct GridSpec {
    int M = 100;       // X intervals
    int K = 60;        // r intervals
    int q1 = 9;        // quadrature order, first (dominant) variable
    int q2 = 5;
    int N_dt = 1;      // sub-steps per withdrawal period
    double n_sd = 6.0; // grid half-width in standard deviations of the horizon law
    QuadMap map = QuadMap::rotation;
    int threads = 0;   // 0: hardware concurrency

    // explicit bounds override the n_sd rule when finite
    double X_min = std::numeric_limits<double>::quiet_NaN();
    double X_max = std::numeric_limits<double>::quiet_NaN();
    double r_min = std::numeric_limits<double>::quiet_NaN();
    double r_max = std::numeric_limits<double>::quiet_NaN();

    void validate() const {
        require(M >= 4, "GridSpec: need M >= 4");
        require(K >= 3, "GridSpec: need K >= 3");
        require(q1 >= 1 && q2 >= 1 && q1 >= q2, "GridSpec: need q1 >= q2 >= 1");
        require(N_dt >= 1, "GridSpec: need N_dt >= 1");
        require(n_sd > 0.0, "GridSpec: need n_sd > 0");
    }

    static GridSpec fine() { return {}; }
    static GridSpec coarse() {
        GridSpec s;
        s.M = 50;
        s.K = 30;
        s.q1 = 5;
        s.q2 = 3;
        return s;
    }
    static GridSpec vanilla_bench() {
        GridSpec s;
        s.M = 100;
        s.K = 20;
        s.q1 = 12;
        s.q2 = 3;
        return s;
    }
};

// Bounds from the horizon law of (ln W(T), r(T)) under the T-bond measure,
// mean +/- n_sd standard deviations, nudged to keep the spot state strictly
// inside.  Uniform discretization in both X = ln(W/W0) and r.
inline Grids2D build_grids(const ModelParams& p, double horizon, double alpha,
                           const GridSpec& spec) {
    spec.validate();
    p.validate();
    require(horizon > 0.0, "build_grids: horizon must be > 0");
    const JointMoments3 jm = joint_moments(p, horizon, Measure::q_tilde, horizon);
    require(jm.var_r > 0.0, "build_grids: degenerate rate dimension (sigma_r = 0)");

    double x_lo = spec.X_min, x_hi = spec.X_max;
    if (!finite(x_lo) || !finite(x_hi)) {
        const double mean_x = jm.mean_lnS - std::log(p.S0) - alpha * horizon;
        const double sd_x = std::sqrt(jm.var_lnS);
        x_lo = mean_x - spec.n_sd * sd_x;
        x_hi = mean_x + spec.n_sd * sd_x;
        const double mx = 0.05 * (x_hi - x_lo);
        if (x_lo > -mx) x_lo = -mx;
        if (x_hi < mx) x_hi = mx;
    }
    double r_lo = spec.r_min, r_hi = spec.r_max;
    if (!finite(r_lo) || !finite(r_hi)) {
        const double sd_r = std::sqrt(jm.var_r);
        r_lo = jm.mean_r - spec.n_sd * sd_r;
        r_hi = jm.mean_r + spec.n_sd * sd_r;
        const double mr = 0.05 * (r_hi - r_lo);
        if (r_lo > p.r0 - mr) r_lo = p.r0 - mr;
        if (r_hi < p.r0 + mr) r_hi = p.r0 + mr;
    }
    require(x_lo < 0.0 && 0.0 < x_hi, "build_grids: X bounds must bracket 0");
    require(r_lo < p.r0 && p.r0 < r_hi, "build_grids: r bounds must bracket r0");

    Grids2D g;
    g.W0 = 1.0; // engine works in X = ln(W / W(0)); W0 rescales payoffs outside
    g.X = {x_lo, (x_hi - x_lo) / spec.M, spec.M};
    g.r = {r_lo, (r_hi - r_lo) / spec.K, spec.K};
    return g;
}

inline Grids1D build_grids_1d(const ModelParams& p, double horizon, double alpha,
                              const GridSpec& spec, bool constant_r0) {
    spec.validate();
    require(horizon > 0.0, "build_grids_1d: horizon must be > 0");
    const double rate_int = constant_r0
                                ? p.r0 * horizon
                                : p.theta * horizon + (p.r0 - p.theta) * h1(p.kappa * horizon) / p.kappa;
    const double mean_x = rate_int - (alpha + 0.5 * p.sigma_S * p.sigma_S) * horizon;
    const double sd_x = p.sigma_S * std::sqrt(horizon);
    require(sd_x > 0.0, "build_grids_1d: degenerate wealth dimension (sigma_S = 0)");
    double x_lo = mean_x - spec.n_sd * sd_x;
    double x_hi = mean_x + spec.n_sd * sd_x;
    const double mx = 0.05 * (x_hi - x_lo);
    if (x_lo > -mx) x_lo = -mx;
    if (x_hi < mx) x_hi = mx;
    Grids1D g;
    g.W0 = 1.0;
    g.X = {x_lo, (x_hi - x_lo) / spec.M, spec.M};
    return g;
}

// Standalone one-period expectation operator (the engine's inner step).
inline ValueSurface expectation_step(const ValueSurface& src, const TransitionMoments& tm,
                                     const ModelParams& p, const Grids2D& g, int q1, int q2,
                                     QuadMap map = QuadMap::rotation, int threads = 1) {
    const detail::StepContext2D ctx = detail::make_step_context(p, tm, g, q1, q2, map);
    ValueSurface dst;
    dst.resize(src.M, src.K);
    detail::expectation_step(ctx, src, dst, threads);
    return dst;
}

struct DynamicResult {
    double price = 0.0;
    // optimal withdrawal index d (gamma = d * spacing) per recorded date,
    // laid out (j, k, m); dates in application order N-1, ..., 1
    std::vector<int> action_dates;
    std::vector<std::vector<std::uint16_t>> actions;
};

namespace detail {

inline void expectation_step_multi(const StepContext2D& c, const std::vector<ValueSurface>& src,
                                   std::vector<ValueSurface>& dst, int threads) {
    const int K = c.g.r.n;
    const std::size_t rows = src.size() * static_cast<std::size_t>(K + 1);
    parallel_for(rows, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t it = lo; it < hi; ++it) {
            const std::size_t j = it / (K + 1);
            const int k = static_cast<int>(it % (K + 1));
            dst[j].guarantee_level = src[j].guarantee_level;
            step_row(c, src[j], dst[j], k);
        }
    });
}

struct Engine2D {
    ModelParams p;
    GridSpec spec;
    Grids2D g;
    StepContext2D ctx;
    int n_dates = 0;  // withdrawal dates
    int total = 0;    // sub-steps
    int threads = 1;

    Engine2D(const ModelParams& params, double alpha, double horizon, int dates,
             const GridSpec& sp)
        : p(params), spec(sp) {
        p.validate();
        threads = resolve_threads(sp.threads);
        n_dates = dates;
        total = dates * sp.N_dt;
        const double delta = horizon / total;
        g = build_grids(p, horizon, alpha, sp);
        const TransitionMoments tm = transition_moments(p, alpha, delta, delta, Measure::q_tilde);
        ctx = make_step_context(p, tm, g, sp.q1, sp.q2, sp.map);
    }

    bool jump_after(int s) const { return (s - 1) % spec.N_dt == 0 && s >= 2; }
    int date_of(int s) const { return (s - 1) / spec.N_dt; }
};

} // namespace detail

inline double price_static_1d(const ModelParams& p, const GMWBContract& c, const GridSpec& spec,
                              bool constant_r0);

// GMWB value at t_0 under the contractual withdrawal plan (single guarantee
// track).  sigma_r = 0 collapses to the 1-d engine with the ODE rate path.
inline double price_static(const ModelParams& p, const GMWBContract& c, const GridSpec& spec) {
    c.validate();
    p.validate();
    if (p.sigma_r == 0.0) return price_static_1d(p, c, spec, false);

    const int N = c.withdrawal_count();
    detail::Engine2D e(p, c.alpha, c.T, N, spec);
    const double G = c.contractual_amount();
    const double A_term = c.premium - (N - 1) * G;
    const TerminalPayoff tp{TerminalPayoff::wealth_floor, cashflow(c, N, A_term) / c.premium};

    // engine prices on W0 = 1; all contract amounts scale with the premium
    const std::vector<XTarget> taps = static_jump_taps(e.g, G / c.premium);
    GMWBContract cs = c;
    cs.premium = 1.0; // cashflow() of the scaled contract

    ValueSurface cur, nxt;
    cur.resize(spec.M, spec.K);
    nxt.resize(spec.M, spec.K);
    std::vector<TerminalPayoff> tps{tp};
    std::vector<ValueSurface> tmp(1);

    for (int s = e.total; s >= 2; --s) {
        if (s == e.total) {
            tmp[0] = std::move(nxt);
            detail::analytic_step(e.ctx, tps, tmp, e.threads);
            nxt = std::move(tmp[0]);
        } else {
            detail::expectation_step(e.ctx, cur, nxt, e.threads);
        }
        std::swap(cur, nxt);
        if (e.jump_after(s)) {
            apply_jump_static(e.g, cs, e.date_of(s), cur, nxt, taps, e.threads);
            std::swap(cur, nxt);
        }
    }
    const double v = (e.total == 1) ? detail::point_step_analytic(e.ctx, p, tp, 0.0, p.r0)
                                    : detail::point_step(e.ctx, p, cur, 0.0, p.r0);
    return c.premium * v;
}

inline DynamicResult price_dynamic_1d(const ModelParams& p, const GMWBContract& c,
                                      const GridSpec& spec, int J, bool constant_r0);

// GMWB value under optimal withdrawals on the J-level guarantee grid.
inline DynamicResult price_dynamic(const ModelParams& p, const GMWBContract& c,
                                   const GridSpec& spec, int J, bool record_actions = false) {
    c.validate();
    p.validate();
    require(J >= 2, "price_dynamic: need J >= 2");
    if (p.sigma_r == 0.0) return price_dynamic_1d(p, c, spec, J, false);

    const int N = c.withdrawal_count();
    detail::Engine2D e(p, c.alpha, c.T, N, spec);

    GMWBContract cs = c;
    cs.premium = 1.0;
    const GuaranteeGrid ag = make_guarantee_grid(1.0, J);
    const DynamicJumpTable jt = make_dynamic_jump_table(e.g, cs, ag, 1);

    std::vector<TerminalPayoff> tps(J);
    for (int j = 0; j < J; ++j)
        tps[j] = {TerminalPayoff::wealth_floor, cashflow(cs, N, ag.levels[j])};

    std::vector<ValueSurface> cur(J), nxt(J);
    for (int j = 0; j < J; ++j) {
        cur[j].resize(spec.M, spec.K);
        nxt[j].resize(spec.M, spec.K);
        cur[j].guarantee_level = nxt[j].guarantee_level = ag.levels[j];
    }

    DynamicResult res;
    for (int s = e.total; s >= 2; --s) {
        if (s == e.total)
            detail::analytic_step(e.ctx, tps, nxt, e.threads);
        else
            detail::expectation_step_multi(e.ctx, cur, nxt, e.threads);
        std::swap(cur, nxt);
        if (e.jump_after(s)) {
            std::vector<std::uint16_t>* act = nullptr;
            if (record_actions) {
                res.action_dates.push_back(e.date_of(s));
                res.actions.emplace_back(static_cast<std::size_t>(J) * (spec.K + 1) * (spec.M + 1));
                act = &res.actions.back();
            }
            apply_jump_dynamic(e.g, jt, cur, nxt, e.threads, act);
            std::swap(cur, nxt);
        }
    }
    const double v = (e.total == 1)
                         ? detail::point_step_analytic(e.ctx, p, tps[J - 1], 0.0, p.r0)
                         : detail::point_step(e.ctx, p, cur[J - 1], 0.0, p.r0);
    res.price = c.premium * v;
    return res;
}

inline double price_european_1d(const ModelParams& p, double strike, OptionKind kind, double T,
                                int n_steps, const GridSpec& spec, double fee, bool constant_r0);

// European claim on the fee-dragged wealth account via the backward engine;
// the vanilla benchmark of the closed-form layer.
inline double price_european(const ModelParams& p, double strike, OptionKind kind, double T,
                             int n_steps, const GridSpec& spec, double fee = 0.0) {
    p.validate();
    require(strike > 0.0 && T > 0.0 && n_steps >= 1, "price_european: invalid inputs");
    if (p.sigma_r == 0.0) return price_european_1d(p, strike, kind, T, n_steps, spec, fee, false);

    detail::Engine2D e(p, fee, T, n_steps, spec);
    const TerminalPayoff tp{kind == OptionKind::call ? TerminalPayoff::call : TerminalPayoff::put,
                            strike / p.S0};

    ValueSurface cur, nxt;
    cur.resize(spec.M, spec.K);
    nxt.resize(spec.M, spec.K);
    std::vector<TerminalPayoff> tps{tp};
    std::vector<ValueSurface> tmp(1);
    for (int s = e.total; s >= 2; --s) {
        if (s == e.total) {
            tmp[0] = std::move(nxt);
            detail::analytic_step(e.ctx, tps, tmp, e.threads);
            nxt = std::move(tmp[0]);
        } else {
            detail::expectation_step(e.ctx, cur, nxt, e.threads);
        }
        std::swap(cur, nxt);
    }
    const double v = (e.total == 1) ? detail::point_step_analytic(e.ctx, p, tp, 0.0, p.r0)
                                    : detail::point_step(e.ctx, p, cur, 0.0, p.r0);
    return p.S0 * v;
}

// ---- deterministic-rate (1-d) engine ----

inline double price_static_1d(const ModelParams& p, const GMWBContract& c, const GridSpec& spec,
                              bool constant_r0) {
    const int N = c.withdrawal_count();
    const int total = N * spec.N_dt;
    const double delta = c.T / total;
    const Grids1D g = build_grids_1d(p, c.T, c.alpha, spec, constant_r0);
    const detail::StepContext1D ctx =
        detail::make_step_context_1d(p, c.alpha, delta, total, g, spec.q1, constant_r0);

    const double G = c.contractual_amount();
    const double A_term = c.premium - (N - 1) * G;
    const TerminalPayoff tp{TerminalPayoff::wealth_floor, cashflow(c, N, A_term) / c.premium};
    GMWBContract cs = c;
    cs.premium = 1.0;
    const std::vector<XTarget> taps = detail::static_jump_taps_1d(g, G / c.premium);

    Surface1D cur, nxt;
    cur.v.assign(spec.M + 1, 0.0);
    nxt.v.assign(spec.M + 1, 0.0);
    for (int s = total; s >= 2; --s) {
        if (s == total)
            detail::analytic_step_1d(ctx, s, tp, nxt);
        else
            detail::expectation_step_1d(ctx, s, cur, nxt);
        std::swap(cur, nxt);
        if ((s - 1) % spec.N_dt == 0) {
            detail::apply_jump_static_1d(g, cs, (s - 1) / spec.N_dt, cur, nxt, taps);
            std::swap(cur, nxt);
        }
    }
    const double v = (total == 1) ? detail::point_step_analytic_1d(ctx, 1, tp, 0.0)
                                  : detail::point_step_1d(ctx, 1, cur, 0.0);
    return c.premium * v;
}

inline DynamicResult price_dynamic_1d(const ModelParams& p, const GMWBContract& c,
                                      const GridSpec& spec, int J, bool constant_r0) {
    const int N = c.withdrawal_count();
    const int total = N * spec.N_dt;
    const double delta = c.T / total;
    const Grids1D g = build_grids_1d(p, c.T, c.alpha, spec, constant_r0);
    const detail::StepContext1D ctx =
        detail::make_step_context_1d(p, c.alpha, delta, total, g, spec.q1, constant_r0);
    const int threads = resolve_threads(spec.threads);

    GMWBContract cs = c;
    cs.premium = 1.0;
    const GuaranteeGrid ag = make_guarantee_grid(1.0, J);
    const DynamicJumpTable jt = detail::make_dynamic_jump_table_1d(g, cs, ag, 1);

    std::vector<Surface1D> cur(J), nxt(J);
    std::vector<TerminalPayoff> tps(J);
    for (int j = 0; j < J; ++j) {
        cur[j].v.assign(spec.M + 1, 0.0);
        nxt[j].v.assign(spec.M + 1, 0.0);
        cur[j].guarantee_level = nxt[j].guarantee_level = ag.levels[j];
        tps[j] = {TerminalPayoff::wealth_floor, cashflow(cs, N, ag.levels[j])};
    }

    for (int s = total; s >= 2; --s) {
        if (s == total) {
            parallel_for(static_cast<std::size_t>(J), threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t j = lo; j < hi; ++j) detail::analytic_step_1d(ctx, s, tps[j], nxt[j]);
            });
        } else {
            parallel_for(static_cast<std::size_t>(J), threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t j = lo; j < hi; ++j) detail::expectation_step_1d(ctx, s, cur[j], nxt[j]);
            });
        }
        std::swap(cur, nxt);
        if ((s - 1) % spec.N_dt == 0) {
            detail::apply_jump_dynamic_1d(g, jt, cur, nxt, threads);
            std::swap(cur, nxt);
        }
    }
    DynamicResult res;
    const double v = (total == 1) ? detail::point_step_analytic_1d(ctx, 1, tps[J - 1], 0.0)
                                  : detail::point_step_1d(ctx, 1, cur[J - 1], 0.0);
    res.price = c.premium * v;
    return res;
}

inline double price_european_1d(const ModelParams& p, double strike, OptionKind kind, double T,
                                int n_steps, const GridSpec& spec, double fee, bool constant_r0) {
    const int total = n_steps * spec.N_dt;
    const double delta = T / total;
    const Grids1D g = build_grids_1d(p, T, fee, spec, constant_r0);
    const detail::StepContext1D ctx =
        detail::make_step_context_1d(p, fee, delta, total, g, spec.q1, constant_r0);
    const TerminalPayoff tp{kind == OptionKind::call ? TerminalPayoff::call : TerminalPayoff::put,
                            strike / p.S0};
    Surface1D cur, nxt;
    cur.v.assign(spec.M + 1, 0.0);
    nxt.v.assign(spec.M + 1, 0.0);
    for (int s = total; s >= 2; --s) {
        if (s == total)
            detail::analytic_step_1d(ctx, s, tp, nxt);
        else
            detail::expectation_step_1d(ctx, s, cur, nxt);
        std::swap(cur, nxt);
    }
    const double v = (total == 1) ? detail::point_step_analytic_1d(ctx, 1, tp, 0.0)
                                  : detail::point_step_1d(ctx, 1, cur, 0.0);
    return p.S0 * v;
}

// Paper's deterministic-rate comparison: rate held constant at r0.
inline double price_deterministic_rate(const ModelParams& p, const GMWBContract& c,
                                       const GridSpec& spec, WithdrawalStrategy strategy,
                                       int J = 100) {
    c.validate();
    p.validate();
    if (strategy == WithdrawalStrategy::Static) return price_static_1d(p, c, spec, true);
    return price_dynamic_1d(p, c, spec, J, true).price;
}

inline double price_gmwb(const ModelParams& p, const GMWBContract& c, const GridSpec& spec,
                         WithdrawalStrategy strategy, RateModel rate_model, int J = 100) {
    if (rate_model == RateModel::Deterministic)
        return price_deterministic_rate(p, c, spec, strategy, J);
    if (strategy == WithdrawalStrategy::Static) return price_static(p, c, spec);
    return price_dynamic(p, c, spec, J).price;
}

// Fee alpha* with Q_0(alpha*) = premium, found by a bracketed Brent search;
// the price is strictly decreasing in alpha.  Returns nullopt when even the
// free contract is worth less than the premium.
struct FairFeeResult {
    double alpha = 0.0;
    int evaluations = 0;
};

inline std::optional<FairFeeResult> fair_fee(const ModelParams& p, const GMWBContract& c,
                                             const GridSpec& spec, WithdrawalStrategy strategy,
                                             RateModel rate_model = RateModel::Stochastic,
                                             int J = 100, double alpha_hi = 0.05,
                                             double tol = 1e-5) {
    int evals = 0;
    auto f = [&](double a) {
        GMWBContract c2 = c;
        c2.alpha = a;
        ++evals;
        return price_gmwb(p, c2, spec, strategy, rate_model, J) - c.premium;
    };

    double a_lo = 0.0, f_lo = f(a_lo);
    if (f_lo < 0.0) return std::nullopt;
    if (f_lo == 0.0) return FairFeeResult{0.0, evals};
    double a_hi = alpha_hi, f_hi = f(a_hi);
    while (f_hi > 0.0 && a_hi < 0.4) {
        a_lo = a_hi;
        f_lo = f_hi;
        a_hi *= 2.0;
        f_hi = f(a_hi);
    }
    if (f_hi > 0.0) return std::nullopt;

    // Brent's method on the bracket
    double a = a_lo, b = a_hi, fa = f_lo, fb = f_hi;
    double cc = a, fc = fa, d = b - a, e = b - a;
    for (int it = 0; it < 100; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = cc; cc = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (cc - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return FairFeeResult{b, evals};
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double pq, qq, rq;
            const double s = fb / fa;
            if (a == cc) {
                pq = 2.0 * xm * s;
                qq = 1.0 - s;
            } else {
                qq = fa / fc;
                rq = fb / fc;
                pq = s * (2.0 * xm * qq * (qq - rq) - (b - a) * (rq - 1.0));
                qq = (qq - 1.0) * (rq - 1.0) * (s - 1.0);
            }
            if (pq > 0.0) qq = -qq;
            pq = std::abs(pq);
            if (2.0 * pq < std::min(3.0 * xm * qq - std::abs(tol1 * qq), std::abs(e * qq))) {
                e = d;
                d = pq / qq;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            cc = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return FairFeeResult{b, evals};
}

} // namespace gmwb
