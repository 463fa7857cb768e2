#pragma once

#include <cmath>

#include "gmwb/math.hpp"
#include "gmwb/model.hpp"

namespace gmwb {

enum class OptionKind { call, put };

struct VanillaAnalytics {
    double sigma_eff2 = 0.0; // total effective variance of ln S(T)
    double d1 = 0.0;
    double d2 = 0.0;
    double discount = 1.0;   // P(0, T)
};

inline VanillaAnalytics vanilla_analytics(const ModelParams& p, double strike, double T,
                                          double fee = 0.0) {
    require(finite(strike) && strike > 0.0, "vanilla: strike must be > 0");
    require(finite(T) && T > 0.0, "vanilla: maturity must be > 0");
    require(finite(fee) && fee >= 0.0, "vanilla: fee must be >= 0");
    p.validate();

    VanillaAnalytics va;
    va.discount = bond_price(p, p.r0, 0.0, T);
    const double k = p.kappa, u = k * T;
    va.sigma_eff2 = p.sigma_S * p.sigma_S * T + p.sigma_r * p.sigma_r / (2.0 * k * k * k) * h3(u) +
                    2.0 * p.rho * p.sigma_S * p.sigma_r / (k * k) * h2(u);
    const double forward_spot = p.S0 * std::exp(-fee * T);
    if (va.sigma_eff2 > 0.0) {
        const double s = std::sqrt(va.sigma_eff2);
        va.d1 = (std::log(forward_spot / strike) - std::log(va.discount) + 0.5 * va.sigma_eff2) / s;
        va.d2 = va.d1 - s;
    }
    return va;
}

// European price under the joint model:
//   call = S0 N(d1) - K P(0,T) N(d2),  put by parity.
// `fee` prices the claim on the fee-dragged wealth account W(T) = S(T) e^{-fee T};
// the default 0 is the plain asset option.
inline double vanilla_price(const ModelParams& p, double strike, double T, OptionKind kind,
                            double fee = 0.0) {
    const VanillaAnalytics va = vanilla_analytics(p, strike, T, fee);
    const double forward_spot = p.S0 * std::exp(-fee * T);
    if (va.sigma_eff2 <= 0.0) {
        // fully degenerate dynamics: discounted intrinsic value of the forward
        const double intrinsic = forward_spot - strike * va.discount;
        if (kind == OptionKind::call) return intrinsic > 0.0 ? intrinsic : 0.0;
        return intrinsic < 0.0 ? -intrinsic : 0.0;
    }
    if (kind == OptionKind::call)
        return forward_spot * norm_cdf(va.d1) - strike * va.discount * norm_cdf(va.d2);
    return strike * va.discount * norm_cdf(-va.d2) - forward_spot * norm_cdf(-va.d1);
}

} // namespace gmwb
