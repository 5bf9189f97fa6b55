#include "torusflow/grid.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "torusflow/errors.hpp"

using namespace torusflow;
using tftest::kPi;
using tftest::make_grid;

TEST_CASE("grid construction validates arguments") {
    CHECK_THROWS_AS(TorusGrid(1.0, 1.0, 7, 16), InvalidGrid);
    CHECK_THROWS_AS(TorusGrid(1.0, 1.0, 16, 2), InvalidGrid);
    CHECK_THROWS_AS(TorusGrid(-1.0, 1.0, 16, 16), InvalidGrid);

    auto g = make_grid(2.0, 1.0, 32, 16);
    CHECK(g->area() == doctest::Approx(2.0).epsilon(1e-15));
    // summing cell_area over all cells reproduces |Omega|
    double total = 0.0;
    for (int i = 0; i < g->size(); ++i) total += g->cell_area();
    CHECK(std::abs(total - g->area()) <= 1e-12 * g->area());
}

TEST_CASE("laplacian multiplier table is exactly -|xi|^2") {
    auto g = make_grid(2.0, 3.0, 8, 12);
    auto xi2 = g->xi_sq();
    const int nxc = g->nx() / 2 + 1;
    for (int iy = 0; iy < g->ny(); ++iy) {
        const int n = iy <= g->ny() / 2 ? iy : iy - g->ny();
        for (int jx = 0; jx < nxc; ++jx) {
            const double expect = 4.0 * kPi * kPi *
                                  (jx * jx / (g->a() * g->a()) +
                                   n * n / (g->b() * g->b()));
            CHECK(xi2[iy * nxc + jx] == doctest::Approx(expect).epsilon(1e-14));
        }
    }
}

TEST_CASE("integral of simple fields") {
    SUBCASE("constant on unit torus") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field one(g, 1.0);
        CHECK(integral(one) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("zero-mean harmonic") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field f = Field::from_function(
            g, [&](double x, double) { return std::cos(2.0 * kPi * x); });
        CHECK(std::abs(integral(f)) <= 1e-12);
    }
    SUBCASE("constant plus harmonic on a=2,b=1") {
        auto g = make_grid(2.0, 1.0, 32, 16);
        Field f = Field::from_function(g, [&](double x, double) {
            return 3.0 + std::cos(2.0 * kPi * x / 2.0);
        });
        CHECK(std::abs(integral(f) - 6.0) <= 1e-10);
    }
}

TEST_CASE("laplacian on analytic eigenfunctions") {
    SUBCASE("constants are harmonic") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field c(g, 4.2);
        Field lc = laplacian(c);
        for (int i = 0; i < lc.size(); ++i) CHECK(std::abs(lc[i]) <= 1e-12);
    }
    SUBCASE("cos(2 pi x) on unit torus") {
        auto g = make_grid(1.0, 1.0, 32, 32);
        Field f = Field::from_function(
            g, [&](double x, double) { return std::cos(2.0 * kPi * x); });
        Field lf = laplacian(f);
        for (int i = 0; i < f.size(); ++i) {
            CHECK(lf[i] ==
                  doctest::Approx(-4.0 * kPi * kPi * f[i]).epsilon(1e-10));
        }
    }
    SUBCASE("sin(pi y) on a=1,b=2") {
        auto g = make_grid(1.0, 2.0, 16, 32);
        Field f = Field::from_function(
            g, [&](double, double y) { return std::sin(kPi * y); });
        Field lf = laplacian(f);
        for (int i = 0; i < f.size(); ++i) {
            CHECK(std::abs(lf[i] + kPi * kPi * f[i]) <= 1e-10);
        }
    }
    SUBCASE("output mean is zero") {
        auto g = make_grid(1.5, 0.8, 16, 16);
        Field f = tftest::random_field(g, 101);
        CHECK(std::abs(mean(laplacian(f))) <= 1e-11);
    }
}

TEST_CASE("inverse laplacian") {
    SUBCASE("pure mean maps to zero") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field f(g, 5.0);
        Field v = inv_laplacian_zero_mean(f);
        for (int i = 0; i < v.size(); ++i) CHECK(std::abs(v[i]) <= 1e-13);
    }
    SUBCASE("single mode inversion") {
        auto g = make_grid(1.0, 1.0, 32, 32);
        Field f = Field::from_function(
            g, [&](double x, double) { return std::cos(2.0 * kPi * x); });
        Field v = inv_laplacian_zero_mean(f);
        for (int i = 0; i < f.size(); ++i) {
            CHECK(v[i] ==
                  doctest::Approx(f[i] / (4.0 * kPi * kPi)).epsilon(1e-10));
        }
    }
    SUBCASE("self-consistency on random fields") {
        auto g = make_grid(1.3, 0.7, 32, 32);
        for (unsigned seed : {1u, 2u, 3u}) {
            Field f = tftest::random_field(g, seed);
            Field v = inv_laplacian_zero_mean(f);
            CHECK(std::abs(mean(v)) <= 1e-10 * (1.0 + norm_l2(f)));
            Field resid = laplacian(v) + (f - mean(f));
            CHECK(norm_l2(resid) <= 1e-10 * norm_l2(f));
        }
    }
}

TEST_CASE("norms on reference fields") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    SUBCASE("constant field") {
        Field one(g, 1.0);
        CHECK(norm_l2(one) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(norm_V(one) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(norm_Vstar(one) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("single mode Parseval value") {
        Field f = Field::from_function(
            g, [&](double x, double) { return std::cos(2.0 * kPi * x); });
        const double expect =
            std::sqrt(0.5) * std::sqrt(1.0 + 4.0 * kPi * kPi);
        CHECK(norm_V(f) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("multiplier ordering") {
        for (unsigned seed : {11u, 12u, 13u}) {
            Field f = tftest::random_field(g, seed);
            CHECK(norm_Vstar(f) <= norm_l2(f) * (1.0 + 1e-12));
            CHECK(norm_l2(f) <= norm_V(f) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("Parseval identity between physical and spectral quadrature") {
    auto g = make_grid(2.0, 1.0, 32, 16);
    for (unsigned seed : {5u, 6u, 7u}) {
        Field f = tftest::random_field(g, seed);
        const double phys = dot(f, f);
        std::vector<std::complex<double>> spec(g->spectral_size());
        g->to_spectral(f.values(), spec);
        double sum = 0.0;
        auto w = g->mode_weight();
        for (int k = 0; k < g->spectral_size(); ++k) {
            sum += w[k] * std::norm(spec[k]);
        }
        sum *= g->area();
        CHECK(std::abs(phys - sum) <= 1e-10 * phys);
    }
}

TEST_CASE("norm axioms on random pairs") {
    auto g = make_grid(1.0, 2.0, 16, 32);
    for (unsigned seed : {21u, 22u}) {
        Field f = tftest::random_field(g, seed);
        Field h = tftest::random_field(g, seed + 100);
        for (auto norm : {norm_l2, norm_V, norm_Vstar}) {
            CHECK(norm(-2.5 * f) ==
                  doctest::Approx(2.5 * norm(f)).epsilon(1e-12));
            CHECK(norm(f + h) <= norm(f) + norm(h) + 1e-12);
        }
    }
}

TEST_CASE("round trip to spectral space and back") {
    auto g = make_grid(1.0, 1.0, 16, 16);
    Field f = tftest::random_field(g, 31);
    std::vector<std::complex<double>> spec(g->spectral_size());
    g->to_spectral(f.values(), spec);
    Field back(g);
    g->to_physical(spec, back.values());
    for (int i = 0; i < f.size(); ++i) {
        CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-12));
    }
}

TEST_CASE("dealias removes only high modes") {
    auto g = make_grid(1.0, 1.0, 24, 24);
    // mode 2 is kept, mode 11 is beyond 24/3 = 8 and dropped
    Field f = Field::from_function(g, [&](double x, double y) {
        return std::cos(2.0 * kPi * 2.0 * x) + 0.5 * std::cos(2.0 * kPi * 11.0 * y);
    });
    Field low = Field::from_function(
        g, [&](double x, double) { return std::cos(2.0 * kPi * 2.0 * x); });
    Field d = dealias(f);
    for (int i = 0; i < f.size(); ++i) {
        CHECK(d[i] == doctest::Approx(low[i]).epsilon(1e-10));
    }
}

TEST_CASE("helmholtz solve inverts the shifted operator") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    Field f = tftest::random_field(g, 77);
    Field u = solve_helmholtz(f, 2.0, 0.3);
    Field resid = (2.0 * u) - (0.3 * laplacian(u)) - f;
    CHECK(norm_l2(resid) <= 1e-10 * norm_l2(f));
}
