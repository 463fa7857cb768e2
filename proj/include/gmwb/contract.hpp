#pragma once

#include <cmath>
#include <vector>

#include "gmwb/math.hpp"

namespace gmwb {

// GMWB rider on a wealth account: the policyholder may withdraw at dates
// t_n = n T / N, n = 1..N; amounts above the contractual G_n are penalized.
struct GMWBContract {
    double premium = 1.0;  // W(0), also the initial guarantee balance
    double T = 10.0;       // maturity (years)
    int Nw = 4;            // withdrawals per annum
    double alpha = 0.0;    // annual fee, charged continuously
    double beta = 0.1;     // penalty on the excess above G_n, in [0, 1]

    int withdrawal_count() const { return static_cast<int>(std::lround(T * Nw)); }
    double period() const { return T / withdrawal_count(); }
    double annual_rate() const { return 1.0 / T; }
    // contractual per-period amount, uniform dates: premium * (t_n - t_{n-1}) / T
    double contractual_amount() const { return premium / withdrawal_count(); }

    void validate() const {
        require(finite(premium) && premium > 0.0, "GMWBContract: premium must be > 0");
        require(finite(T) && T > 0.0, "GMWBContract: maturity must be > 0");
        require(Nw >= 1, "GMWBContract: Nw must be >= 1");
        require(std::abs(T * Nw - withdrawal_count()) < 1e-9,
                "GMWBContract: T * Nw must be an integer number of withdrawals");
        require(finite(alpha) && alpha >= 0.0, "GMWBContract: fee must be >= 0");
        require(finite(beta) && beta >= 0.0 && beta <= 1.0, "GMWBContract: beta must be in [0, 1]");
    }
};

// Cash received for withdrawing gamma at date n: gamma up to G_n, above that
// the excess is charged the penalty beta.
inline double cashflow(const GMWBContract& c, int n, double gamma) {
    (void)n; // uniform dates: G_n does not depend on n
    require(finite(gamma) && gamma >= 0.0, "cashflow: withdrawal must be >= 0");
    const double G = c.contractual_amount();
    if (gamma <= G) return gamma;
    return G + (1.0 - c.beta) * (gamma - G);
}

// Final payoff max(W, C_N(A)): remaining wealth or the remaining guarantee
// net of the penalty charge.
inline double terminal_payoff(const GMWBContract& c, double W, double A) {
    require(finite(W) && W >= 0.0, "terminal_payoff: wealth must be >= 0");
    require(finite(A) && A >= -1e-12 && A <= c.premium * (1.0 + 1e-12),
            "terminal_payoff: guarantee balance outside [0, premium]");
    const double cash = cashflow(c, c.withdrawal_count(), A < 0.0 ? 0.0 : A);
    return W > cash ? W : cash;
}

// Uniform guarantee-balance grid 0 = A_1 < ... < A_J = premium.
struct GuaranteeGrid {
    std::vector<double> levels;
    int J = 0;
    double spacing = 0.0;
};

inline GuaranteeGrid make_guarantee_grid(double premium, int J) {
    require(J >= 2, "GuaranteeGrid: need J >= 2 levels");
    require(finite(premium) && premium > 0.0, "GuaranteeGrid: premium must be > 0");
    GuaranteeGrid g;
    g.J = J;
    g.spacing = premium / (J - 1);
    g.levels.resize(J);
    for (int j = 0; j < J; ++j) g.levels[j] = g.spacing * j;
    g.levels.back() = premium;
    return g;
}

} // namespace gmwb
