#include "torusflow/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "torusflow/errors.hpp"
#include "torusflow/functionals.hpp"
#include "torusflow/krylov.hpp"

namespace torusflow {

namespace {

double coord_norm(std::span<const double> c) {
    double s = 0.0;
    for (double x : c) s += x * x;
    return std::sqrt(s);
}

Field kernel_projection(const ManifoldChart& chart, const Field& f) {
    return projector_P(chart.kernel_basis, f);
}

Field complement(const ManifoldChart& chart, const Field& f) {
    return f - kernel_projection(chart, f);
}

// Newton solve for the correction z at fixed kernel offset.
Field solve_correction(const ManifoldChart& chart, const Field& w_base) {
    auto grid = chart.w_star.grid_ptr();
    const int n = chart.w_star.size();
    Field z(grid, 0.0);

    auto residual = [&](const Field& zz) {
        return complement(chart,
                          first_variation_E(w_base + zz, chart.lambda));
    };

    Field r = residual(z);
    double rnorm = norm_l2(r);
    for (int iter = 0; iter < chart.newton_max && rnorm > chart.g_tol;
         ++iter) {
        // Jacobian (I-P)(-lap - e^w)(I-P) at the current iterate
        Field ew = exp(w_base + z);
        auto apply_a = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            fx = complement(chart, fx);
            Field fy = (-1.0 * laplacian(fx)) - (ew * fx);
            fy = complement(chart, fy);
            std::copy(fy.values().begin(), fy.values().end(), y.begin());
        };
        auto precond = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            Field fy = complement(chart, solve_helmholtz(fx, 1.0, 1.0));
            std::copy(fy.values().begin(), fy.values().end(), y.begin());
        };

        std::vector<double> delta(n, 0.0), b(n);
        for (int i = 0; i < n; ++i) b[i] = -r[i];
        auto lin = krylov::minres(apply_a, precond, b, delta, chart.krylov_tol,
                                  chart.krylov_max);
        if (!lin.converged) {
            throw ChartExceeded(
                "correction solve stalled: coordinates are outside the "
                "implicit-function neighbourhood");
        }
        Field dz(grid);
        std::copy(delta.begin(), delta.end(), dz.values().begin());
        dz = complement(chart, dz);

        double s = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 20; ++ls) {
            Field z_trial = complement(chart, axpy(s, dz, z));
            Field r_trial = residual(z_trial);
            const double rt = norm_l2(r_trial);
            if (rt < rnorm) {
                z = std::move(z_trial);
                r = std::move(r_trial);
                rnorm = rt;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            throw ChartExceeded("correction Newton iteration stagnated");
        }
    }
    if (rnorm > chart.g_tol) {
        std::ostringstream msg;
        msg << "correction solve stopped at residual " << rnorm;
        throw ChartExceeded(msg.str());
    }
    return z;
}

}  // namespace

ManifoldChart build_chart(const StationaryResult& base,
                          const SpectrumOptions& opts) {
    if (!base.converged) {
        throw Error("chart construction requires a converged stationary state");
    }
    ManifoldChart chart;
    chart.w_star = base.w_star;
    chart.lambda = base.lambda;

    LinearOperatorSpec l_spec{OperatorKind::L, base.u_star, base.lambda};
    int k = 8;
    const int n = base.u_star.grid().size();
    for (;;) {
        SpectrumReport rep = spectrum(l_spec, k, opts);
        if (rep.kernel_dim < static_cast<int>(rep.eigenvalues.size()) ||
            k >= n) {
            chart.kernel_basis = rep.kernel_basis;
            break;
        }
        k = std::min(n, 2 * k);
    }
    return chart;
}

Field solve_g(const ManifoldChart& chart, std::span<const double> c) {
    if (static_cast<int>(c.size()) !=
        static_cast<int>(chart.kernel_basis.size())) {
        throw ChartExceeded(
            "coordinate dimension does not match the kernel dimension");
    }
    if (coord_norm(c) > chart.radius * (1.0 + 1e-12)) {
        throw ChartExceeded("coordinates outside the chart radius");
    }

    std::vector<double> key(c.begin(), c.end());
    {
        std::lock_guard<std::mutex> lock(*chart.cache_mutex);
        auto it = chart.cache.find(key);
        if (it != chart.cache.end()) return it->second;
    }

    Field w_base = chart.w_star;
    for (size_t i = 0; i < c.size(); ++i) {
        w_base = axpy(c[i], chart.kernel_basis[i], w_base);
    }
    Field z = solve_correction(chart, w_base);
    {
        std::lock_guard<std::mutex> lock(*chart.cache_mutex);
        chart.cache.emplace(std::move(key), z);
    }
    return z;
}

Field project_Q(const ManifoldChart& chart, const Field& w) {
    Field diff = w - chart.w_star;
    if (norm_V(diff) > chart.radius * (1.0 + 1e-12)) {
        throw ChartExceeded("state outside the chart neighbourhood");
    }
    std::vector<double> c(chart.kernel_basis.size());
    for (size_t i = 0; i < c.size(); ++i) {
        c[i] = dot(diff, chart.kernel_basis[i]);
    }
    Field g = solve_g(chart, c);
    Field out = chart.w_star + g;
    for (size_t i = 0; i < c.size(); ++i) {
        out = axpy(c[i], chart.kernel_basis[i], out);
    }
    return out;
}

double reduced_energy(const ManifoldChart& chart, std::span<const double> c) {
    Field g = solve_g(chart, c);
    Field w = chart.w_star + g;
    for (size_t i = 0; i < c.size(); ++i) {
        w = axpy(c[i], chart.kernel_basis[i], w);
    }
    return energy_E(w, chart.lambda) - energy_E(chart.w_star, chart.lambda);
}

LemmaBoundReport verify_lemma_bounds(const ManifoldChart& chart, int samples,
                                     double sample_radius, unsigned seed) {
    LemmaBoundReport rep;
    rep.noise_floor =
        10.0 * norm_Vstar(first_variation_E(chart.w_star, chart.lambda));

    auto grid = chart.w_star.grid_ptr();
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    for (int s = 0; s < samples; ++s) {
        Field dir(grid);
        for (int i = 0; i < dir.size(); ++i) dir[i] = u(rng);
        dir = solve_helmholtz(dir, 1.0, 1.0);  // smooth the direction
        const double nv = norm_V(dir);
        if (nv == 0.0) continue;
        Field w = axpy(sample_radius / nv, dir, chart.w_star);

        Field qw = project_Q(chart, w);
        Field grad_w = first_variation_E(w, chart.lambda);
        Field grad_qw = first_variation_E(qw, chart.lambda);
        const double dist_v = norm_V(w - qw);
        const double grad_w_vstar = norm_Vstar(grad_w);
        const double grad_qw_vstar = norm_Vstar(grad_qw);
        const double de =
            std::abs(energy_E(w, chart.lambda) - energy_E(qw, chart.lambda));

        if (dist_v > 1e-14) {
            rep.max_quadratic_ratio =
                std::max(rep.max_quadratic_ratio, de / (dist_v * dist_v));
        }
        if (grad_w_vstar > 1e-15) {
            rep.max_distance_ratio =
                std::max(rep.max_distance_ratio, dist_v / grad_w_vstar);
            const double num =
                grad_qw_vstar <= rep.noise_floor ? 0.0 : grad_qw_vstar;
            rep.max_gradient_ratio =
                std::max(rep.max_gradient_ratio, num / grad_w_vstar);
        }
        ++rep.samples_used;
    }
    return rep;
}

double certify_radius(ManifoldChart& chart) {
    const int n = static_cast<int>(chart.kernel_basis.size());
    if (n == 0) return chart.radius;

    std::vector<std::vector<double>> directions;
    for (int i = 0; i < n; ++i) {
        std::vector<double> d(n, 0.0);
        d[i] = 1.0;
        directions.push_back(d);
        d[i] = -1.0;
        directions.push_back(std::move(d));
    }
    std::vector<double> diag(n, 1.0 / std::sqrt(static_cast<double>(n)));
    directions.push_back(diag);

    while (chart.radius > 1e-8) {
        bool ok = true;
        for (const auto& d : directions) {
            std::vector<double> c(n);
            for (int i = 0; i < n; ++i) c[i] = chart.radius * d[i];
            try {
                solve_g(chart, c);
            } catch (const ChartExceeded&) {
                ok = false;
                break;
            }
        }
        if (ok) return chart.radius;
        chart.radius *= 0.5;
    }
    throw ChartExceeded("no certifiable chart radius found");
}

}  // namespace torusflow
