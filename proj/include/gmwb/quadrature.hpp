#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "gmwb/math.hpp"

namespace gmwb {

// Gauss-Hermite rule for integrals of the form \int e^{-x^2} f(x) dx
// ~ sum_i weights[i] * f(nodes[i]).  Nodes are the roots of the Hermite
// polynomial H_q, stored in ascending order; sum of weights is sqrt(pi).
struct QuadratureRule {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes by Newton iteration on the orthonormal Hermite recurrence with the
// classical asymptotic initial guesses; weights via 2 / h_q'(x)^2.
inline QuadratureRule gauss_hermite(int q) {
    require(q >= 1 && q <= 64, "gauss_hermite: order must be in [1, 64]");

    QuadratureRule rule;
    rule.order = q;
    rule.nodes.assign(q, 0.0);
    rule.weights.assign(q, 0.0);

    const double pim4 = 0.75112554446494248286; // pi^{-1/4}
    const int half = (q + 1) / 2;
    double z = 0.0;

    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * q + 1.0) - 1.85575 * std::pow(2.0 * q + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(q), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[q - 1];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[q - 2];
        } else {
            z = 2.0 * z - rule.nodes[q - i + 1];
        }

        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= q; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * q) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
        }

        rule.nodes[q - 1 - i] = z;      // largest roots first from the guesses
        rule.nodes[i] = -z;
        rule.weights[q - 1 - i] = 2.0 / (pp * pp);
        rule.weights[i] = rule.weights[q - 1 - i];
    }
    if (q % 2 == 1) rule.nodes[q / 2] = 0.0; // middle root is exactly zero
    return rule;
}

// Rotation to the principal axes of a standardized bivariate Normal with
// correlation rho: Y1 = sqrt(2)(a Z1 + b Z2), Y2 = sqrt(2)(b Z1 + a Z2)
// maps independent (Z1, Z2) to unit-variance (Y1, Y2) with corr rho.
struct RotationCoefficients {
    double a = 1.0;
    double b = 0.0;
};

inline RotationCoefficients rotate(double rho) {
    require(std::abs(rho) <= 1.0, "rotate: |rho| must be <= 1");
    const double sp = std::sqrt(1.0 + rho);
    const double sm = std::sqrt(1.0 - rho);
    return {0.5 * (sp + sm), 0.5 * (sp - sm)};
}

inline std::pair<double, double> rotate_map(const RotationCoefficients& rc, double z1, double z2) {
    return {sqrt2 * (rc.a * z1 + rc.b * z2), sqrt2 * (rc.b * z1 + rc.a * z2)};
}

// Cholesky alternative: Y1 = sqrt(2) Z1, Y2 = sqrt(2)(rho Z1 + sqrt(1-rho^2) Z2).
inline std::pair<double, double> cholesky_map(double rho, double z1, double z2) {
    require(std::abs(rho) <= 1.0, "cholesky_map: |rho| must be <= 1");
    return {sqrt2 * z1, sqrt2 * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2)};
}

enum class QuadMap { rotation, cholesky };

// Linear coefficients of (xi_i, xi_j) in the standardized excursions:
// Y1 = sqrt(2)(y1_i xi_i + y1_j xi_j), Y2 = sqrt(2)(y2_i xi_i + y2_j xi_j).
struct MapCoefficients {
    double y1_i, y1_j;
    double y2_i, y2_j;
};

inline MapCoefficients map_coefficients(QuadMap map, double rho) {
    if (map == QuadMap::rotation) {
        const RotationCoefficients rc = rotate(rho);
        return {rc.a, rc.b, rc.b, rc.a};
    }
    return {1.0, 0.0, rho, std::sqrt(1.0 - rho * rho)};
}

} // namespace gmwb
