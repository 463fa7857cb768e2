#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gmwb/contract.hpp"
#include "gmwb/math.hpp"
#include "gmwb/model.hpp"
#include "gmwb/parallel.hpp"
#include "gmwb/rng.hpp"
#include "gmwb/vanilla.hpp"

namespace gmwb {

struct MCConfig {
    std::int64_t n_paths = 1'000'000;
    std::uint64_t seed = 1;
    bool antithetic = false;
    int threads = 0;

    void validate() const { require(n_paths >= 2, "MCConfig: need at least 2 paths"); }
};

struct MCResult {
    double price = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double wall_seconds = 0.0;
};

namespace detail {

// Lower-triangular factor of a symmetric 3x3 covariance with a pivot guard
// for the nearly singular sigma_r -> 0 limit: pivots in [-1e-14, 0] clamp
// to zero, more negative ones are rejected.
struct Chol3 {
    double l11 = 0, l21 = 0, l22 = 0, l31 = 0, l32 = 0, l33 = 0;
};

inline Chol3 cholesky3(double c11, double c21, double c22, double c31, double c32, double c33) {
    Chol3 L;
    auto guarded_sqrt = [](double x) {
        require(x > -1e-14, "cholesky3: covariance matrix not positive semidefinite");
        return x > 0.0 ? std::sqrt(x) : 0.0;
    };
    L.l11 = guarded_sqrt(c11);
    L.l21 = L.l11 > 0.0 ? c21 / L.l11 : 0.0;
    L.l22 = guarded_sqrt(c22 - L.l21 * L.l21);
    L.l31 = L.l11 > 0.0 ? c31 / L.l11 : 0.0;
    L.l32 = L.l22 > 0.0 ? (c32 - L.l31 * L.l21) / L.l22 : 0.0;
    L.l33 = guarded_sqrt(c33 - L.l31 * L.l31 - L.l32 * L.l32);
    return L;
}

// Fixed-size blocks accumulated independently and merged pairwise in block
// order: the reduction is identical for any thread count.
constexpr std::int64_t mc_block = 8192;

inline std::pair<double, double> reduce_blocks(std::vector<double>& sum, std::vector<double>& sum2) {
    std::size_t n = sum.size();
    while (n > 1) {
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i + half < n; ++i) {
            sum[i] += sum[i + half];
            sum2[i] += sum2[i + half];
        }
        n = half;
    }
    return {sum[0], sum2[0]};
}

template <typename PathFn>
MCResult run_paths(const MCConfig& cfg, PathFn&& path_value) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::int64_t n = cfg.n_paths;
    const std::int64_t blocks = (n + mc_block - 1) / mc_block;
    std::vector<double> bsum(blocks, 0.0), bsum2(blocks, 0.0);

    parallel_for(static_cast<std::size_t>(blocks), cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t b = lo; b < hi; ++b) {
            const std::int64_t p0 = static_cast<std::int64_t>(b) * mc_block;
            const std::int64_t p1 = std::min(n, p0 + mc_block);
            double s = 0.0, s2 = 0.0;
            for (std::int64_t i = p0; i < p1; ++i) {
                Xoshiro256 rng(cfg.seed, static_cast<std::uint64_t>(i));
                double v;
                if (cfg.antithetic) {
                    double flip = 1.0;
                    const double v1 = path_value(rng, flip);
                    Xoshiro256 rng2(cfg.seed, static_cast<std::uint64_t>(i));
                    flip = -1.0;
                    const double v2 = path_value(rng2, flip);
                    v = 0.5 * (v1 + v2);
                } else {
                    double flip = 1.0;
                    v = path_value(rng, flip);
                }
                s += v;
                s2 += v * v;
            }
            bsum[b] = s;
            bsum2[b] = s2;
        }
    });

    const auto [sum, sum2] = reduce_blocks(bsum, bsum2);
    MCResult res;
    res.n_paths = n;
    res.price = sum / n;
    const double var = (sum2 - sum * sum / n) / (n - 1);
    res.std_error = std::sqrt(var > 0.0 ? var / n : 0.0);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace detail

// Static-strategy GMWB price by simulation from the exact per-period
// trivariate law of (d ln S, r, dY) under Q, fee drag applied to ln W;
// no time-discretization error.
inline MCResult mc_price_static(const ModelParams& p, const GMWBContract& c, const MCConfig& cfg) {
    p.validate();
    c.validate();
    cfg.validate();

    const int N = c.withdrawal_count();
    const double dt = c.period();
    const double G = c.contractual_amount();
    const JointMoments3 jm = joint_moments(p, dt, Measure::q);
    const detail::Chol3 L = detail::cholesky3(jm.var_lnS, jm.cov_lnS_r, jm.var_r, jm.cov_lnS_Y,
                                              jm.cov_Y_r, jm.var_Y);
    // conditional means are affine in the period-start rate r*
    const double b_over_k = h1(p.kappa * dt) / p.kappa;
    const double i1_int = p.theta * (dt - b_over_k);      // I_1 = i1_int + b/k * r*
    const double er_slope = std::exp(-p.kappa * dt);
    const double er_int = p.theta * h1(p.kappa * dt);
    const double lnS_drift = -0.5 * p.sigma_S * p.sigma_S * dt;
    const double fee = c.alpha * dt;
    const double a_term = c.premium - (N - 1) * G;

    return detail::run_paths(cfg, [&](Xoshiro256& rng, double flip) {
        double W = c.premium, r = p.r0, Y = 0.0, pv = 0.0;
        for (int n = 1; n <= N; ++n) {
            const double z1 = flip * rng.next_normal();
            const double z2 = flip * rng.next_normal();
            const double z3 = flip * rng.next_normal();
            const double i1 = i1_int + b_over_k * r;
            const double d_lnS = i1 + lnS_drift + L.l11 * z1;
            const double r_new = er_int + er_slope * r + L.l21 * z1 + L.l22 * z2;
            const double d_Y = i1 + L.l31 * z1 + L.l32 * z2 + L.l33 * z3;
            W *= std::exp(d_lnS - fee);
            r = r_new;
            Y += d_Y;
            if (n < N) {
                pv += std::exp(-Y) * G;
                W = W > G ? W - G : 0.0;
            } else {
                const double floor_v = cashflow(c, N, a_term);
                pv += std::exp(-Y) * (W > floor_v ? W : floor_v);
            }
        }
        return pv;
    });
}

// One-shot European vanilla from the exact joint law of (ln S(T), Y(T)).
inline MCResult mc_vanilla(const ModelParams& p, double strike, double T, OptionKind kind,
                           const MCConfig& cfg, double fee = 0.0) {
    p.validate();
    cfg.validate();
    require(strike > 0.0 && T > 0.0, "mc_vanilla: invalid strike or maturity");

    const JointMoments3 jm = joint_moments(p, T, Measure::q);
    // 2x2 factor for (ln S, Y)
    const double l11 = std::sqrt(jm.var_lnS);
    const double l21 = l11 > 0.0 ? jm.cov_lnS_Y / l11 : 0.0;
    const double v22 = jm.var_Y - l21 * l21;
    require(v22 > -1e-14, "mc_vanilla: degenerate joint law");
    const double l22 = v22 > 0.0 ? std::sqrt(v22) : 0.0;

    return detail::run_paths(cfg, [&](Xoshiro256& rng, double flip) {
        const double z1 = flip * rng.next_normal();
        const double z2 = flip * rng.next_normal();
        const double lnS = jm.mean_lnS - fee * T + l11 * z1;
        const double Y = jm.mean_Y + l21 * z1 + l22 * z2;
        const double S = std::exp(lnS);
        const double payoff = (kind == OptionKind::call) ? (S > strike ? S - strike : 0.0)
                                                         : (S < strike ? strike - S : 0.0);
        return std::exp(-Y) * payoff;
    });
}

} // namespace gmwb
