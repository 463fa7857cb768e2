#pragma once

#include <cmath>

#include "gmwb/math.hpp"

namespace gmwb {

// Correlated lognormal-asset / Vasicek-rate model:
//   dS/S = r dt + sigma_S (rho dB1 + sqrt(1-rho^2) dB2)
//   dr   = kappa (theta - r) dt + sigma_r dB1
struct ModelParams {
    double sigma_S = 0.2;   // asset volatility (per sqrt(year))
    double rho = 0.0;       // instantaneous correlation, |rho| <= 1
    double kappa = 0.0349;  // mean-reversion speed (1/year), > 0
    double theta = 0.05;    // long-run rate level
    double sigma_r = 0.02;  // rate volatility (per sqrt(year)), >= 0
    double S0 = 1.0;        // spot asset value, > 0
    double r0 = 0.05;       // spot short rate

    void validate() const {
        require(finite(sigma_S) && finite(rho) && finite(kappa) && finite(theta) &&
                    finite(sigma_r) && finite(S0) && finite(r0),
                "ModelParams: non-finite input");
        require(kappa > 0.0, "ModelParams: kappa must be > 0");
        require(sigma_S > 0.0, "ModelParams: sigma_S must be > 0");
        require(sigma_r >= 0.0, "ModelParams: sigma_r must be >= 0");
        require(std::abs(rho) <= 1.0, "ModelParams: |rho| must be <= 1");
        require(S0 > 0.0, "ModelParams: S0 must be > 0");
    }
};

struct BondCoefficients {
    double B = 0.0;   // (1 - e^{-kappa tau}) / kappa
    double A = 0.0;
    double tau = 0.0; // T - t
};

inline BondCoefficients bond_coefficients(const ModelParams& p, double tau) {
    require(finite(tau) && tau >= 0.0, "bond_coefficients: tau must be >= 0");
    BondCoefficients c;
    c.tau = tau;
    c.B = h1(p.kappa * tau) / p.kappa;
    const double sr2 = p.sigma_r * p.sigma_r;
    c.A = (p.theta - sr2 / (2.0 * p.kappa * p.kappa)) * (c.B - tau) - sr2 / (4.0 * p.kappa) * c.B * c.B;
    return c;
}

// Zero-coupon bond P(t, T) = e^{A - r B} with constant theta.
inline double bond_price(const ModelParams& p, double r, double t, double T) {
    require(finite(r) && finite(t) && finite(T), "bond_price: non-finite input");
    require(t <= T, "bond_price: need t <= T");
    const BondCoefficients c = bond_coefficients(p, T - t);
    return std::exp(c.A - r * c.B);
}

enum class Measure {
    q,       // risk-neutral, money-market numeraire
    q_tilde, // forward measure under the bond numeraire
};

// Per-period bivariate Normal law of (ln W(t_n^-), r(t_n)) given
// (ln W(t_{n-1}^+) = x*, r(t_{n-1}) = r*):
//   mean r    = mu_r_intercept + mu_r_slope * r*
//   mean ln W = x* + mu_x_intercept + mu_x_slope_r * r*
struct TransitionMoments {
    double mu_r_intercept = 0.0;
    double mu_r_slope = 1.0;
    double tau_r2 = 0.0;
    double mu_x_intercept = 0.0;
    double mu_x_slope_r = 0.0;
    double tau_x2 = 0.0;
    double rho_xr = 0.0;
    double delta_n = 0.0;
    double b_n = 0.0; // 1 - e^{-kappa delta}
    double a_n = 0.0; // 1 - e^{-2 kappa delta}
    bool rate_degenerate = false; // sigma_r == 0: tau_r2 = 0 and rho_xr defined as 0
};

// Moments over a horizon `delta` under `measure`; for q_tilde the numeraire
// bond matures `numeraire_maturity` after the period start (equal to delta
// in the per-period scheme, equal to T when pricing a T-maturity claim).
// `alpha` is the continuously charged fee entering the ln W drift.
inline TransitionMoments transition_moments(const ModelParams& p, double alpha, double delta,
                                            double numeraire_maturity, Measure measure) {
    require(finite(alpha) && finite(delta) && finite(numeraire_maturity),
            "transition_moments: non-finite input");
    require(delta > 0.0, "transition_moments: delta must be > 0");
    require(numeraire_maturity >= delta, "transition_moments: numeraire maturity before period end");

    const double k = p.kappa, sS = p.sigma_S, sr = p.sigma_r, rho = p.rho;
    const double sr2 = sr * sr;
    const double u = k * delta;
    const double uT = k * numeraire_maturity;

    TransitionMoments m;
    m.delta_n = delta;
    m.b_n = h1(u);
    m.a_n = h1(2.0 * u);

    const bool tilde = (measure == Measure::q_tilde);

    m.mu_r_slope = std::exp(-u);
    m.mu_r_intercept = p.theta * m.b_n;
    if (tilde) {
        // a_n e^{-kappa(T'-delta)} - 2 b_n; equals -b_n^2 exactly when T' = delta
        const double corr = (numeraire_maturity == delta)
                                ? -m.b_n * m.b_n
                                : m.a_n * std::exp(-(uT - u)) - 2.0 * m.b_n;
        m.mu_r_intercept += sr2 / (2.0 * k * k) * corr;
    }

    m.tau_r2 = sr2 / (2.0 * k) * m.a_n;

    // I_1 = mean of int r du; intercept part (coefficient of r* is b_n/kappa)
    double i1_int = (p.theta - (tilde ? sr2 / (k * k) : 0.0)) * delta - p.theta * m.b_n / k;
    if (tilde) i1_int += m.b_n / k * sr2 / (2.0 * k * k) * (2.0 - std::exp(-uT) + std::exp(-(uT - u)));
    m.mu_x_slope_r = m.b_n / k;

    m.mu_x_intercept = i1_int - (alpha + 0.5 * sS * sS) * delta;
    if (tilde) {
        // measure correction -rho sS sr / k^2 (k delta - e^{-k T'}(e^{k delta} - 1));
        // reduces to -rho sS sr / k^2 * h2(k delta) when T' = delta
        const double corr = (numeraire_maturity == delta)
                                ? h2(u)
                                : u - std::exp(-uT) * std::expm1(u);
        m.mu_x_intercept -= rho * sS * sr / (k * k) * corr;
    }

    m.tau_x2 = sS * sS * delta + sr2 / (2.0 * k * k * k) * h3(u) + 2.0 * rho * sS * sr / (k * k) * h2(u);

    if (sr == 0.0) {
        m.rate_degenerate = true;
        m.rho_xr = 0.0;
    } else {
        // cov(ln W, r) = rho sS sr b/k + sr^2 b^2 / (2 k^2)   [2b - a = b^2]
        const double cov = rho * sS * sr * m.b_n / k + sr2 / (2.0 * k * k) * m.b_n * m.b_n;
        m.rho_xr = cov / std::sqrt(m.tau_x2 * m.tau_r2);
    }
    return m;
}

// Spec'd per-period interface: Q~ moments with fee drag.
inline TransitionMoments q_tilde_moments(const ModelParams& p, double alpha, double delta,
                                         double numeraire_maturity) {
    return transition_moments(p, alpha, delta, numeraire_maturity, Measure::q_tilde);
}

// Joint Normal law of (ln S(t), r(t), Y(t) = int_0^t r du) given (S0, r0).
struct JointMoments3 {
    double mean_lnS = 0.0, var_lnS = 0.0;
    double mean_r = 0.0, var_r = 0.0;
    double mean_Y = 0.0, var_Y = 0.0;
    double cov_lnS_r = 0.0;
    double cov_Y_r = 0.0;
    double cov_lnS_Y = 0.0;
    Measure measure = Measure::q;
};

inline JointMoments3 joint_moments(const ModelParams& p, double t, Measure measure,
                                   double numeraire_maturity = 0.0) {
    require(finite(t) && t > 0.0, "joint_moments: horizon must be > 0");
    const bool tilde = (measure == Measure::q_tilde);
    if (tilde) require(numeraire_maturity >= t, "joint_moments: numeraire maturity before horizon");

    const double k = p.kappa, sS = p.sigma_S, sr = p.sigma_r, rho = p.rho;
    const double sr2 = sr * sr;
    const double u = k * t;
    const double uT = tilde ? k * numeraire_maturity : 0.0;
    const double b = h1(u), a = h1(2.0 * u);

    JointMoments3 jm;
    jm.measure = measure;

    jm.mean_r = p.r0 * std::exp(-u) + p.theta * b;
    if (tilde) jm.mean_r += sr2 / (2.0 * k * k) * (a * std::exp(-(uT - u)) - 2.0 * b);
    jm.var_r = sr2 / (2.0 * k) * a;

    double i1 = b / k * (p.r0 - p.theta) + p.theta * t;
    if (tilde) i1 += b / k * sr2 / (2.0 * k * k) * (2.0 - std::exp(-uT) + std::exp(-(uT - u))) - sr2 / (k * k) * t;
    jm.mean_Y = i1;
    jm.var_Y = sr2 / (2.0 * k * k * k) * h3(u);

    jm.mean_lnS = std::log(p.S0) + i1 - 0.5 * sS * sS * t;
    if (tilde) jm.mean_lnS -= rho * sS * sr / (k * k) * (u - std::exp(-uT) * std::expm1(u));
    jm.var_lnS = sS * sS * t + sr2 / (2.0 * k * k * k) * h3(u) + 2.0 * rho * sS * sr / (k * k) * h2(u);

    jm.cov_lnS_r = rho * sS * sr * b / k + sr2 / (2.0 * k * k) * b * b;
    jm.cov_Y_r = sr2 / (2.0 * k * k) * b * b;
    jm.cov_lnS_Y = rho * sS * sr / (k * k) * h2(u) + sr2 / (2.0 * k * k * k) * h3(u);
    return jm;
}

inline JointMoments3 q_measure_joint_moments(const ModelParams& p, double t) {
    return joint_moments(p, t, Measure::q);
}

} // namespace gmwb
