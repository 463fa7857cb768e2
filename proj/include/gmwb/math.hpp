#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmwb {

constexpr double sqrt_pi = 1.7724538509055160273;
constexpr double sqrt2   = 1.4142135623730950488;

// h1(u) = 1 - e^{-u}
inline double h1(double u) { return -std::expm1(-u); }

// h2(u) = u - 1 + e^{-u}.  Direct evaluation cancels near u = 0; the series
// u^2/2 - u^3/6 + ... is used below the crossover.
inline double h2(double u) {
    if (std::abs(u) < 0.03) {
        return u * u * (0.5 + u * (-1.0 / 6.0 + u * (1.0 / 24.0 + u * (-1.0 / 120.0 + u / 720.0))));
    }
    return u - 1.0 + std::exp(-u);
}

// h3(u) = 2u - 3 + 4e^{-u} - e^{-2u} = 2u - 4(1-e^{-u}) + (1-e^{-2u}).
// Leading term (2/3)u^3; series coefficients are (-1)^{n+1}(2^n-4)/n!.
inline double h3(double u) {
    if (std::abs(u) < 0.03) {
        return u * u * u * (2.0 / 3.0 + u * (-0.5 + u * (7.0 / 30.0 + u * (-1.0 / 12.0 + u * (31.0 / 1260.0 - u / 160.0)))));
    }
    const double e1 = std::exp(-u);
    return 2.0 * u - 3.0 + 4.0 * e1 - e1 * e1;
}

// Standard Normal distribution function via erfc, accurate to ~1e-16.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / sqrt2); }

inline double norm_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool finite(double x) { return std::isfinite(x); }

} // namespace gmwb
