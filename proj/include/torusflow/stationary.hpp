#ifndef TORUSFLOW_STATIONARY_HPP
#define TORUSFLOW_STATIONARY_HPP

#include <string>
#include <vector>

#include "torusflow/grid.hpp"

namespace torusflow {

struct StationaryResult {
    Field w_star;
    Field v_star;  // zero-mean potential
    Field u_star;  // e^{w_star}, mass lambda
    double lambda = 0.0;
    double residual_l2 = 0.0;
    int newton_iters = 0;
    bool converged = false;
};

struct StationaryOptions {
    int max_newton = 50;
    int max_line_search = 20;
    double krylov_tol = 1e-12;
    int krylov_max = 5000;
};

/// Newton iteration on R(v) = -lap v - lambda (e^v/int e^v - 1/|Omega|) in
/// the zero-mean subspace, with inverse-Laplacian preconditioned MINRES
/// solves and a backtracking line search on ||R||_2.
StationaryResult solve_mean_field(const Field& v0, double lambda, double tol,
                                  const StationaryOptions& opts = {});

/// The mean-field residual R(v) itself (diagnostic surface).
Field mean_field_residual(const Field& v, double lambda);

struct BranchPoint {
    StationaryResult result;
    double min_singular_value = 0.0;
    bool flagged = false;
};

struct ContinuationResult {
    std::vector<BranchPoint> points;
    bool completed = false;
    std::string stop_reason;
};

/// Natural-parameter continuation from branch_start to lambda_end with warm
/// starts. Records the smallest singular value of the Jacobian per step. A
/// sign change of the lowest Jacobian eigenvalue between steps is refined by
/// bisection; the refined point is flagged as a bifurcation candidate once
/// the singular value falls below 1e-6 (1 + lambda/|Omega|).
ContinuationResult continue_in_lambda(const StationaryResult& branch_start,
                                      double lambda_end, int steps,
                                      double tol = 1e-12,
                                      const StationaryOptions& opts = {});

}  // namespace torusflow

#endif
