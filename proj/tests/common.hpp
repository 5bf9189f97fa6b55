#ifndef TORUSFLOW_TESTS_COMMON_HPP
#define TORUSFLOW_TESTS_COMMON_HPP

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "torusflow/grid.hpp"

namespace tftest {

inline constexpr double kPi = std::numbers::pi;

inline std::shared_ptr<torusflow::TorusGrid> make_grid(double a, double b,
                                                       int nx, int ny) {
    return std::make_shared<torusflow::TorusGrid>(a, b, nx, ny);
}

/// Smooth random field: a few low harmonics with seeded coefficients.
inline torusflow::Field random_field(
    std::shared_ptr<const torusflow::TorusGrid> grid, unsigned seed,
    double amplitude = 1.0, int kmax = 3) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double a = grid->a();
    const double b = grid->b();
    torusflow::Field f(grid);
    for (int m = 0; m <= kmax; ++m) {
        for (int n = -kmax; n <= kmax; ++n) {
            if (m == 0 && n < 0) continue;
            const double ac = coef(rng);
            const double as = coef(rng);
            const double scale =
                amplitude / (1.0 + m * m + n * n);  // rough smoothness decay
            for (int iy = 0; iy < grid->ny(); ++iy) {
                for (int ix = 0; ix < grid->nx(); ++ix) {
                    const double phase = 2.0 * kPi * (m * grid->x(ix) / a +
                                                      n * grid->y(iy) / b);
                    f.at(ix, iy) +=
                        scale * (ac * std::cos(phase) + as * std::sin(phase));
                }
            }
        }
    }
    return f;
}

inline torusflow::Field random_zero_mean_field(
    std::shared_ptr<const torusflow::TorusGrid> grid, unsigned seed,
    double amplitude = 1.0, int kmax = 3) {
    torusflow::Field f = random_field(grid, seed, amplitude, kmax);
    const double m = torusflow::mean(f);
    return f - m;
}

}  // namespace tftest

#endif
