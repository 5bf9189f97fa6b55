#include "torusflow/functionals.hpp"

#include <cmath>
#include <vector>

#include "common.hpp"
#include "doctest.h"
#include "torusflow/errors.hpp"

using namespace torusflow;
using tftest::kPi;
using tftest::make_grid;

TEST_CASE("energy_E closed-form values") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    SUBCASE("constant state at lambda = 8 pi") {
        const double lambda = 8.0 * kPi;
        Field w(g, std::log(lambda));
        const double expect = -lambda + lambda * std::log(lambda);
        CHECK(std::abs(energy_E(w, lambda) - expect) <= 1e-6);
    }
    SUBCASE("zero state at lambda = 1") {
        Field w(g, 0.0);
        CHECK(energy_E(w, 1.0) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("additive shift identity") {
        const double lambda = 3.0;
        Field w = tftest::random_field(g, 42, 0.5);
        const double c = 0.37;
        const double lhs = energy_E(w + c, lambda) - energy_E(w, lambda);
        const double rhs = lambda * c - (integral(exp(w + c)) - integral(exp(w)));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("first variation of E") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    const double lambda = 8.0 * kPi;
    SUBCASE("constant stationary state") {
        Field w(g, std::log(lambda / g->area()));
        Field dE = first_variation_E(w, lambda);
        for (int i = 0; i < dE.size(); ++i) CHECK(std::abs(dE[i]) <= 1e-12);
    }
    SUBCASE("analytic linearization around the constant state") {
        const double eps = 1e-5;
        Field w = Field::from_function(g, [&](double x, double) {
            return std::log(lambda) + eps * std::cos(2.0 * kPi * x);
        });
        Field dE = first_variation_E(w, lambda);
        const double coef = eps * (4.0 * kPi * kPi - lambda);
        Field expect = Field::from_function(g, [&](double x, double) {
            return coef * std::cos(2.0 * kPi * x);
        });
        CHECK(norm_l2(dE - expect) <= 10.0 * eps * eps * lambda);
    }
}

TEST_CASE("finite-difference directional derivative matches first variation") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    const double lambda = 2.0;
    for (unsigned seed = 0; seed < 10; ++seed) {
        Field w = tftest::random_field(g, 1000 + seed, 0.6);
        Field phi = tftest::random_field(g, 2000 + seed, 1.0);
        Field dE = first_variation_E(w, lambda);
        const double exact = dot(dE, phi);
        std::vector<double> err;
        for (double h : {1e-2, 1e-3}) {
            const double fd =
                (energy_E(axpy(h, phi, w), lambda) -
                 energy_E(axpy(-h, phi, w), lambda)) /
                (2.0 * h);
            err.push_back(std::abs(fd - exact));
        }
        const double order = std::log10(err[0] / err[1]);
        CHECK(order >= 1.9);
    }
}

TEST_CASE("energy_F") {
    SUBCASE("unit density on the unit torus") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field u(g, 1.0);
        CHECK(energy_F(u) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("constant density closed form") {
        auto g = make_grid(2.0, 1.5, 16, 16);
        const double c = 3.7;
        Field u(g, c);
        const double expect = c * (std::log(c) - 1.0) * g->area();
        CHECK(energy_F(u) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("rejects non-positive density") {
        auto g = make_grid(1.0, 1.0, 16, 16);
        Field u(g, 1.0);
        u[5] = 0.0;
        CHECK_THROWS_AS(energy_F(u), NonPositiveDensity);
    }
}

TEST_CASE("energy_J") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    SUBCASE("zero potential") {
        Field v(g, 0.0);
        CHECK(std::abs(energy_J(v, 8.0 * kPi)) <= 1e-13);
    }
    SUBCASE("quadratic expansion for a single mode") {
        const double lambda = 8.0 * kPi;
        const double eps = 1e-3;
        Field v = Field::from_function(g, [&](double x, double) {
            return eps * std::cos(2.0 * kPi * x);
        });
        const double expect = eps * eps * (4.0 * kPi * kPi - lambda) / 4.0;
        CHECK(std::abs(energy_J(v, lambda) - expect) <= 10.0 * eps * eps * eps);
    }
    SUBCASE("translation invariance") {
        const double lambda = 5.0;
        Field v = tftest::random_zero_mean_field(g, 7, 0.8);
        // translate by whole cells in x and y
        Field shifted(g);
        const int sx = 5, sy = 9;
        for (int iy = 0; iy < g->ny(); ++iy) {
            for (int ix = 0; ix < g->nx(); ++ix) {
                shifted.at(ix, iy) =
                    v.at((ix + sx) % g->nx(), (iy + sy) % g->ny());
            }
        }
        CHECK(energy_J(shifted, lambda) ==
              doctest::Approx(energy_J(v, lambda)).epsilon(1e-11));
    }
    SUBCASE("rejects potentials with a mean component") {
        Field v(g, 0.2);
        CHECK_THROWS_AS(energy_J(v, 1.0), NotZeroMean);
    }
}

TEST_CASE("changes of variables") {
    auto g = make_grid(1.0, 2.0, 16, 32);
    SUBCASE("u -> w -> u round trip") {
        Field u = exp(tftest::random_field(g, 11, 0.7));
        Field u2 = u_from_w(w_from_u(u));
        for (int i = 0; i < u.size(); ++i) {
            CHECK(u2[i] == doctest::Approx(u[i]).epsilon(1e-12));
        }
    }
    SUBCASE("zero potential maps to the constant density") {
        const double lambda = 4.0;
        Field v(g, 0.0);
        Field u = u_from_v(v, lambda);
        for (int i = 0; i < u.size(); ++i) {
            CHECK(u[i] == doctest::Approx(lambda / g->area()).epsilon(1e-13));
        }
    }
    SUBCASE("u_from_v normalizes mass to lambda") {
        const double lambda = 9.3;
        for (unsigned seed : {3u, 4u, 5u}) {
            Field v = tftest::random_field(g, seed, 1.2);
            CHECK(std::abs(integral(u_from_v(v, lambda)) - lambda) <=
                  1e-10 * lambda);
        }
    }
    SUBCASE("v_from_w removes the mean") {
        Field w = tftest::random_field(g, 21, 0.5) + 3.0;
        Field v = v_from_w(w);
        CHECK(std::abs(mean(v)) <= 1e-12);
    }
}

TEST_CASE("first variation is V-to-Vstar Lipschitz on bounded sets") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    const double lambda = 8.0 * kPi;
    const double K = 2.0;
    double max_ratio = 0.0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        Field w1 = tftest::random_field(g, 300 + seed, 0.4);
        Field w2 = tftest::random_field(g, 400 + seed, 0.4);
        w1 = (0.9 * K / norm_V(w1)) * w1;
        w2 = (0.9 * K / norm_V(w2)) * w2;
        const double num =
            norm_Vstar(first_variation_E(w1, lambda) -
                       first_variation_E(w2, lambda));
        const double den = norm_V(w1 - w2);
        if (den > 1e-12) max_ratio = std::max(max_ratio, num / den);
    }
    CHECK(max_ratio > 0.0);
    CHECK(max_ratio < 100.0);
}

TEST_CASE("energy is quadratically bounded near a stationary state") {
    auto g = make_grid(1.0, 1.0, 32, 32);
    const double lambda = 8.0 * kPi;
    Field w_star(g, std::log(lambda));
    const double e_star = energy_E(w_star, lambda);
    double max_ratio = 0.0;
    for (unsigned seed = 0; seed < 20; ++seed) {
        Field z = tftest::random_field(g, 500 + seed, 1.0);
        Field pert = (0.05 / norm_V(z)) * z;
        const double diff =
            std::abs(energy_E(w_star + pert, lambda) - e_star);
        max_ratio = std::max(max_ratio, diff / (norm_V(pert) * norm_V(pert)));
    }
    CHECK(max_ratio > 0.0);
    CHECK(max_ratio < 100.0);
}

TEST_CASE("make_report is finite and self-consistent") {
    auto g = make_grid(1.0, 1.0, 16, 16);
    const double lambda = 8.0 * kPi;
    Field w = tftest::random_field(g, 99, 0.3) + std::log(lambda);
    FunctionalReport r = make_report(w, lambda);
    CHECK(std::isfinite(r.energy_E));
    CHECK(std::isfinite(r.energy_F));
    CHECK(std::isfinite(r.energy_J));
    CHECK(r.mass > 0.0);
    CHECK(r.grad_E_Vstar <= r.grad_E_l2 * (1.0 + 1e-12));
    CHECK(r.mass == doctest::Approx(integral(exp(w))).epsilon(1e-13));
}
