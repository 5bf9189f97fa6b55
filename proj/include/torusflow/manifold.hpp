#ifndef TORUSFLOW_MANIFOLD_HPP
#define TORUSFLOW_MANIFOLD_HPP

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "torusflow/grid.hpp"
#include "torusflow/linops.hpp"
#include "torusflow/stationary.hpp"

namespace torusflow {

/// Local chart of the critical manifold S = {w : (I-P) delta E(w) = 0}
/// around a stationary state, parametrized over the kernel of the
/// linearization L = -lap - e^{w*}. Coordinates c are offsets along the
/// orthonormal kernel basis; samples w = w* + sum c_i phi_i + g(c) with
/// g(c) orthogonal to the kernel.
struct ManifoldChart {
    Field w_star;
    double lambda = 0.0;
    std::vector<Field> kernel_basis;
    double radius = 0.1;
    // solve_g iteration knobs
    double g_tol = 1e-9;
    int newton_max = 40;
    double krylov_tol = 1e-12;
    int krylov_max = 20000;

    // per-coordinate cache of computed corrections
    mutable std::map<std::vector<double>, Field> cache;
    mutable std::shared_ptr<std::mutex> cache_mutex =
        std::make_shared<std::mutex>();
};

/// Assemble the chart at a converged stationary state; the kernel basis is
/// taken from the spectrum of L.
ManifoldChart build_chart(const StationaryResult& base,
                          const SpectrumOptions& opts = {});

/// Correction g(c): Newton solve of (I-P) delta E(w* + sum c phi + z) = 0
/// for z in the kernel-orthogonal complement. Throws ChartExceeded when c is
/// outside the chart or the iteration fails.
Field solve_g(const ManifoldChart& chart, std::span<const double> c);

/// Q w = w* + P(w - w*) + g(P(w - w*)): the nonlinear projection onto S.
Field project_Q(const ManifoldChart& chart, const Field& w);

/// E(w* + sum c phi + g(c)) - E(w*).
double reduced_energy(const ManifoldChart& chart, std::span<const double> c);

struct LemmaBoundReport {
    double max_quadratic_ratio = 0.0;  // |E(w)-E(Qw)| / ||w-Qw||_V^2
    double max_distance_ratio = 0.0;   // ||w-Qw||_V / ||dE(w)||_V*
    double max_gradient_ratio = 0.0;   // ||dE(Qw)||_V* / ||dE(w)||_V*
    int samples_used = 0;
    /// Numerators below this are treated as zero (they are indistinguishable
    /// from the base state's own residual).
    double noise_floor = 0.0;
};

LemmaBoundReport verify_lemma_bounds(const ManifoldChart& chart, int samples,
                                     double sample_radius, unsigned seed = 7);

/// Shrink chart.radius by halving from its current value until solve_g
/// succeeds along coordinate axes and diagonals; returns the certified value.
double certify_radius(ManifoldChart& chart);

}  // namespace torusflow

#endif
