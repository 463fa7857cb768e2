#pragma once

// Test-only oracles, independent of the library's closed-form layer: SDE
// simulation by Euler-Maruyama directly from the model dynamics, sample
// moments with their own standard errors, and small linear-algebra helpers.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gmwb/parallel.hpp"
#include "gmwb/rng.hpp"

namespace oracles {

struct MomentEstimate {
    double mean = 0.0, mean_se = 0.0;
    double var = 0.0, var_se = 0.0;
};

struct CovEstimate {
    double cov = 0.0, cov_se = 0.0;
};

// sample mean/variance with standard errors (4th-moment SE for the variance)
inline MomentEstimate moments(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    MomentEstimate e;
    e.mean = m;
    e.mean_se = std::sqrt(m2 / n);
    e.var = m2 * n / (n - 1.0);
    e.var_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
    return e;
}

inline CovEstimate covariance(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double c = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (x[i] - mx) * (y[i] - my);
        c += p;
        c2 += p * p;
    }
    c /= n;
    c2 /= n;
    CovEstimate e;
    e.cov = c * n / (n - 1.0);
    e.cov_se = std::sqrt(std::max(0.0, c2 - c * c) / n);
    return e;
}

struct SdeParams {
    double sigma_S, rho, kappa, theta, sigma_r, S0, r0;
};

// Euler-Maruyama under the risk-neutral measure:
//   dS/S = r dt + sigma_S (rho dB1 + sqrt(1-rho^2) dB2)
//   dr   = kappa (theta - r) dt + sigma_r dB1
// simulating (ln S, r, Y = int r du); alpha is subtracted from the ln S
// drift so the same routine yields ln W paths.
struct TriSample {
    std::vector<double> lnS, r, Y;
};

inline TriSample euler_q(const SdeParams& p, double alpha, double horizon, double step,
                         std::int64_t n_paths, std::uint64_t seed, int threads = 0) {
    TriSample out;
    out.lnS.resize(n_paths);
    out.r.resize(n_paths);
    out.Y.resize(n_paths);
    const int n_steps = static_cast<int>(std::lround(horizon / step));
    const double dt = horizon / n_steps;
    const double sdt = std::sqrt(dt);
    const double c1 = p.rho, c2 = std::sqrt(1.0 - p.rho * p.rho);

    gmwb::parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            gmwb::Xoshiro256 rng(seed, i);
            double x = std::log(p.S0), r = p.r0, Y = 0.0;
            for (int s = 0; s < n_steps; ++s) {
                const double z1 = rng.next_normal();
                const double z2 = rng.next_normal();
                Y += r * dt;
                x += (r - alpha - 0.5 * p.sigma_S * p.sigma_S) * dt +
                     p.sigma_S * sdt * (c1 * z1 + c2 * z2);
                r += p.kappa * (p.theta - r) * dt + p.sigma_r * sdt * z1;
            }
            out.lnS[i] = x;
            out.r[i] = r;
            out.Y[i] = Y;
        }
    });
    return out;
}

// Euler-Maruyama under the bond-numeraire measure with numeraire maturity
// T' (time from the start):  phi(t) = -sigma_r B_{t,T'},
//   d ln W = (r + sigma_S rho phi - alpha - sigma_S^2/2) dt + sigma_S dB
//   dr     = kappa (theta + sigma_r phi / kappa - r) dt + sigma_r dB1
struct BiSample {
    std::vector<double> lnW, r;
};

inline BiSample euler_q_tilde(const SdeParams& p, double alpha, double horizon,
                              double numeraire_maturity, double step, std::int64_t n_paths,
                              std::uint64_t seed, int threads = 0) {
    BiSample out;
    out.lnW.resize(n_paths);
    out.r.resize(n_paths);
    const int n_steps = static_cast<int>(std::lround(horizon / step));
    const double dt = horizon / n_steps;
    const double sdt = std::sqrt(dt);
    const double c1 = p.rho, c2 = std::sqrt(1.0 - p.rho * p.rho);

    gmwb::parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            gmwb::Xoshiro256 rng(seed, i);
            double x = 0.0, r = p.r0;
            for (int s = 0; s < n_steps; ++s) {
                const double t = s * dt;
                const double B = (1.0 - std::exp(-p.kappa * (numeraire_maturity - t))) / p.kappa;
                const double phi = -p.sigma_r * B;
                const double z1 = rng.next_normal();
                const double z2 = rng.next_normal();
                x += (r + p.sigma_S * p.rho * phi - alpha - 0.5 * p.sigma_S * p.sigma_S) * dt +
                     p.sigma_S * sdt * (c1 * z1 + c2 * z2);
                r += (p.kappa * (p.theta - r) + p.sigma_r * phi) * dt + p.sigma_r * sdt * z1;
            }
            out.lnW[i] = x;
            out.r[i] = r;
        }
    });
    return out;
}

// eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations; accurate
// to ~eps * norm even for nearly singular matrices
inline std::array<double, 3> sym3_eigenvalues(double a11, double a12, double a13, double a22,
                                              double a23, double a33) {
    double a[3][3] = {{a11, a12, a13}, {a12, a22, a23}, {a13, a23, a33}};
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off == 0.0) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    return {a[0][0], a[1][1], a[2][2]};
}

} // namespace oracles
