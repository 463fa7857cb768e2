#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gmwb/rng.hpp"
#include "gmwb/spline.hpp"

using namespace gmwb;

namespace {

std::vector<double> sample(double x0, double h, int n_nodes, double (*f)(double)) {
    std::vector<double> v(n_nodes);
    for (int i = 0; i < n_nodes; ++i) v[i] = f(x0 + h * i);
    return v;
}

} // namespace

TEST_CASE("spline reproduces linear data everywhere", "[spline]") {
    auto lin = [](double x) { return 2.0 * x + 1.0; };
    std::vector<double> v(11);
    for (int i = 0; i <= 10; ++i) v[i] = lin(0.3 + 0.17 * i);
    const CubicSpline1D s(0.3, 0.17, v);
    for (double x = 0.3; x <= 0.3 + 10 * 0.17 + 1e-12; x += 0.013)
        CHECK_THAT(s(x), Catch::Matchers::WithinRel(lin(x), 1e-13));
    // linear continuation outside the grid
    CHECK_THAT(s(0.0), Catch::Matchers::WithinRel(lin(0.0), 1e-12));
    CHECK_THAT(s(3.0), Catch::Matchers::WithinRel(lin(3.0), 1e-12));
}

TEST_CASE("spline exact for cubics on interior intervals", "[spline]") {
    const double x0 = -1.0, h = 0.2;
    const int nodes = 21;
    const auto v = sample(x0, h, nodes, [](double x) { return x * x * x; });
    const CubicSpline1D s(x0, h, v);
    // inside [x1, x_{n-1}] (away from the two boundary intervals)
    for (double x = x0 + h; x <= x0 + h * (nodes - 2) + 1e-12; x += 0.017) {
        INFO("x = " << x);
        CHECK_THAT(s(x), Catch::Matchers::WithinAbs(x * x * x, 1e-12 * std::max(1.0, std::abs(x * x * x)) + 1e-15));
    }
}

TEST_CASE("spline interpolates node values exactly", "[spline]") {
    Xoshiro256 rng(11, 0);
    std::vector<double> v(17);
    for (auto& x : v) x = rng.next_double();
    const CubicSpline1D s(0.0, 0.25, v);
    for (int i = 0; i < 17; ++i) CHECK(s(0.25 * i) == v[i]);
    const CubicSpline1D g(0.0, 0.25, v, SplineKind::global_natural);
    for (int i = 0; i < 17; ++i) CHECK(g(0.25 * i) == v[i]);
}

TEST_CASE("spline order-4 convergence on sin", "[spline]") {
    const double lo = 0.0, hi = 3.14159265358979323846;
    double prev_err = 0.0;
    for (int level = 0; level < 5; ++level) {
        const int n = 20 << level;
        const double h = (hi - lo) / n;
        std::vector<double> v(n + 1);
        for (int i = 0; i <= n; ++i) v[i] = std::sin(lo + h * i);
        const CubicSpline1D s(lo, h, v);
        double err = 0.0;
        // interior only; boundary intervals carry the one-sided rule
        for (double x = lo + 2 * h; x < hi - 2 * h; x += (hi - lo) / 1777.0)
            err = std::max(err, std::abs(s(x) - std::sin(x)));
        if (level > 0) {
            const double ratio = prev_err / err;
            INFO("level " << level << " err " << err << " ratio " << ratio);
            CHECK(ratio > 12.0);
            CHECK(ratio < 20.0);
        }
        prev_err = err;
    }
}

TEST_CASE("global natural spline agrees with local away from boundaries", "[spline]") {
    const int n = 64;
    const double h = 1.0 / n;
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = std::exp(-2.0 * h * i) * std::cos(5.0 * h * i);
    const CubicSpline1D a(0.0, h, v, SplineKind::local);
    const CubicSpline1D b(0.0, h, v, SplineKind::global_natural);
    // both are O(h^4)-accurate; they agree to that order, not bitwise
    for (double x = 0.2; x < 0.8; x += 0.0013) {
        INFO("x = " << x);
        CHECK_THAT(a(x), Catch::Matchers::WithinAbs(b(x), 1e-5));
        const double f = std::exp(-2.0 * x) * std::cos(5.0 * x);
        CHECK_THAT(a(x), Catch::Matchers::WithinAbs(f, 1e-5));
        CHECK_THAT(b(x), Catch::Matchers::WithinAbs(f, 1e-5));
    }
}

TEST_CASE("spline evaluation is linear in the data", "[spline][property]") {
    Xoshiro256 rng(12, 0);
    std::vector<double> f(13), g(13), h(13);
    for (int i = 0; i < 13; ++i) {
        f[i] = rng.next_double();
        g[i] = rng.next_double() - 0.5;
        h[i] = 0.7 * f[i] + 1.9 * g[i];
    }
    const CubicSpline1D sf(0.0, 0.5, f), sg(0.0, 0.5, g), sh(0.0, 0.5, h);
    for (double x = 0.0; x <= 6.0; x += 0.09) {
        const double combo = 0.7 * sf(x) + 1.9 * sg(x);
        CHECK_THAT(sh(x), Catch::Matchers::WithinAbs(combo, 1e-12 * (1.0 + std::abs(combo))));
    }
}

TEST_CASE("stencil weights match the spline object", "[spline]") {
    Xoshiro256 rng(13, 0);
    std::vector<double> v(21);
    for (auto& x : v) x = rng.next_double();
    const CubicSpline1D s(0.0, 0.1, v);
    for (double t = 0.0; t <= 20.0; t += 0.037) {
        const Stencil4 st = spline_stencil(20, t);
        double acc = 0.0;
        for (int c = 0; c < 4; ++c) acc += st.w[c] * v[st.base + c];
        CHECK_THAT(acc, Catch::Matchers::WithinAbs(s(0.1 * t), 1e-13));
    }
}

TEST_CASE("2-d evaluation exact on bilinear data", "[spline]") {
    const int nx = 12, ny = 9;
    std::vector<double> v(nx * ny);
    for (int k = 0; k < ny; ++k)
        for (int m = 0; m < nx; ++m) v[k * nx + m] = 3.0 * (0.1 * m) + 2.0 * (0.2 * k) - 1.0;
    for (double x = 0.0; x <= 1.1; x += 0.03)
        for (double y = 0.0; y <= 1.6; y += 0.07) {
            const double got = spline2d_eval(v, nx, ny, 0.0, 0.1, 0.0, 0.2, x, y);
            CHECK_THAT(got, Catch::Matchers::WithinAbs(3.0 * x + 2.0 * y - 1.0, 1e-12));
        }
}

TEST_CASE("2-d evaluation exact for separable cubics on interior cells", "[spline]") {
    const int nx = 16, ny = 14;
    const double hx = 0.25, hy = 0.3;
    std::vector<double> v(nx * ny);
    auto f = [](double x, double y) { return x * x * x + y * y * y; };
    for (int k = 0; k < ny; ++k)
        for (int m = 0; m < nx; ++m) v[k * nx + m] = f(hx * m, hy * k);
    for (double x = hx; x <= hx * (nx - 2); x += 0.06)
        for (double y = hy; y <= hy * (ny - 2); y += 0.08) {
            const double got = spline2d_eval(v, nx, ny, 0.0, hx, 0.0, hy, x, y);
            CHECK_THAT(got, Catch::Matchers::WithinAbs(f(x, y), 1e-11));
        }
}

TEST_CASE("2-d order-4 convergence on sin*cos", "[spline]") {
    auto f = [](double x, double y) { return std::sin(x) * std::cos(y); };
    double prev_err = 0.0;
    for (int level = 0; level < 4; ++level) {
        const int n = 16 << level;
        const double h = 1.0 / n;
        std::vector<double> v((n + 1) * (n + 1));
        for (int k = 0; k <= n; ++k)
            for (int m = 0; m <= n; ++m) v[k * (n + 1) + m] = f(h * m, h * k);
        double err = 0.0;
        for (double x = 3 * h; x < 1.0 - 3 * h; x += 0.0137)
            for (double y = 3 * h; y < 1.0 - 3 * h; y += 0.0191)
                err = std::max(err, std::abs(spline2d_eval(v, n + 1, n + 1, 0.0, h, 0.0, h, x, y) - f(x, y)));
        if (level > 0) {
            const double ratio = prev_err / err;
            INFO("level " << level << " err " << err << " ratio " << ratio);
            CHECK(ratio > 12.0);
            CHECK(ratio < 20.0);
        }
        prev_err = err;
    }
}
