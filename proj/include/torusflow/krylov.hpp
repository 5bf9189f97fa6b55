#ifndef TORUSFLOW_KRYLOV_HPP
#define TORUSFLOW_KRYLOV_HPP

#include <functional>
#include <span>
#include <vector>

namespace torusflow::krylov {

/// y = Op(x); x and y are distinct buffers of equal length.
using ApplyFn =
    std::function<void(std::span<const double>, std::span<double>)>;

struct SolveResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // final true residual ||b - Ax||_2 / ||b||_2
};

/// Preconditioned conjugate gradients for SPD A with SPD preconditioner
/// (apply_minv ~ M^{-1}). Indefiniteness detected through p'Ap <= 0 is
/// reported by returning converged = false with iterations = -1.
SolveResult pcg(const ApplyFn& apply_a, const ApplyFn& apply_minv,
                std::span<const double> b, std::span<double> x,
                double rel_tol, int max_iter);

/// Preconditioned MINRES for symmetric (possibly indefinite) A with SPD
/// preconditioner.
SolveResult minres(const ApplyFn& apply_a, const ApplyFn& apply_minv,
                   std::span<const double> b, std::span<double> x,
                   double rel_tol, int max_iter);

}  // namespace torusflow::krylov

#endif
