#include "torusflow/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "torusflow/errors.hpp"
#include "torusflow/functionals.hpp"
#include "torusflow/krylov.hpp"
#include "torusflow/linops.hpp"

namespace torusflow {

Field mean_field_residual(const Field& v, double lambda) {
    const double area = v.grid().area();
    Field ev = exp(v);
    const double total = integral(ev);
    Field lap = laplacian(v);
    Field r(v.grid_ptr());
    for (int i = 0; i < v.size(); ++i) {
        r[i] = -lap[i] - lambda * (ev[i] / total - 1.0 / area);
    }
    return r - mean(r);
}

namespace {

StationaryResult pack_result(const Field& v, double lambda, double residual,
                             int iters, bool converged) {
    StationaryResult out;
    out.v_star = v;
    const double total = integral(exp(v));
    out.w_star = v + std::log(lambda / total);
    out.u_star = exp(out.w_star);
    out.lambda = lambda;
    out.residual_l2 = residual;
    out.newton_iters = iters;
    out.converged = converged;
    return out;
}

}  // namespace

StationaryResult solve_mean_field(const Field& v0, double lambda, double tol,
                                  const StationaryOptions& opts) {
    if (!(lambda > 0.0)) throw Error("solve_mean_field requires lambda > 0");
    auto grid = v0.grid_ptr();
    const int n = v0.size();

    Field v = v0 - mean(v0);
    double rnorm = norm_l2(mean_field_residual(v, lambda));

    for (int iter = 0; iter < opts.max_newton; ++iter) {
        if (rnorm <= tol) {
            return pack_result(v, lambda, rnorm, iter, true);
        }
        Field r = mean_field_residual(v, lambda);

        // Jacobian of R at v is the linearized operator B at u = u_from_v(v)
        LinearOperatorSpec jac{OperatorKind::B, u_from_v(v, lambda), lambda};
        auto apply_a = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            Field fy = apply(jac, fx);
            std::copy(fy.values().begin(), fy.values().end(), y.begin());
        };
        auto precond = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            Field fy = inv_laplacian_zero_mean(fx);
            std::copy(fy.values().begin(), fy.values().end(), y.begin());
        };

        std::vector<double> delta(n, 0.0);
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) b[i] = -r[i];
        auto lin = krylov::minres(apply_a, precond, b, delta, opts.krylov_tol,
                                  opts.krylov_max);
        if (!lin.converged) {
            throw SingularJacobian(
                "linear solver stagnated: Jacobian is singular or "
                "near-singular at this point");
        }

        Field dv(grid);
        std::copy(delta.begin(), delta.end(), dv.values().begin());
        dv = dv - mean(dv);  // keep the zero-mean constraint exact

        // backtracking line search on ||R||_2
        double s = 1.0;
        bool accepted = false;
        for (int ls = 0; ls <= opts.max_line_search; ++ls) {
            Field v_trial = axpy(s, dv, v);
            v_trial = v_trial - mean(v_trial);
            const double r_trial =
                norm_l2(mean_field_residual(v_trial, lambda));
            if (r_trial < rnorm) {
                v = std::move(v_trial);
                rnorm = r_trial;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "line search failed at ||R|| = " << rnorm;
            throw NewtonDiverged(msg.str());
        }
    }
    if (rnorm <= tol) {
        return pack_result(v, lambda, rnorm, opts.max_newton, true);
    }
    std::ostringstream msg;
    msg << "Newton did not reach tol = " << tol << " (||R|| = " << rnorm
        << " after " << opts.max_newton << " iterations)";
    throw NewtonDiverged(msg.str());
}

namespace {

double lowest_jacobian_eigenvalue(const StationaryResult& point) {
    LinearOperatorSpec jac{OperatorKind::B, point.u_star, point.lambda};
    SpectrumReport rep = spectrum(jac, 1);
    return rep.eigenvalues.front();
}

double smallest_abs_jacobian_eigenvalue(const StationaryResult& point) {
    LinearOperatorSpec jac{OperatorKind::B, point.u_star, point.lambda};
    SpectrumReport rep = spectrum(jac, 6);
    double best = std::abs(rep.eigenvalues.front());
    for (double e : rep.eigenvalues) best = std::min(best, std::abs(e));
    return best;
}

double flag_threshold(double lambda, double area) {
    return 1e-6 * (1.0 + lambda / area);
}

}  // namespace

ContinuationResult continue_in_lambda(const StationaryResult& branch_start,
                                      double lambda_end, int steps,
                                      double tol,
                                      const StationaryOptions& opts) {
    if (!branch_start.converged) {
        throw Error("continuation requires a converged starting point");
    }
    if (steps < 1) throw Error("continuation requires steps >= 1");

    ContinuationResult out;
    const double area = branch_start.u_star.grid().area();
    const double lambda0 = branch_start.lambda;
    const double dlam = (lambda_end - lambda0) / steps;

    StationaryResult current = branch_start;
    BranchPoint bp;
    bp.result = current;
    bp.min_singular_value = smallest_abs_jacobian_eigenvalue(current);
    bp.flagged =
        bp.min_singular_value < flag_threshold(current.lambda, area);
    out.points.push_back(bp);
    double eig_prev = lowest_jacobian_eigenvalue(current);

    for (int i = 1; i <= steps; ++i) {
        const double lam = lambda0 + i * dlam;
        StationaryResult next;
        try {
            next = solve_mean_field(current.v_star, lam, tol, opts);
        } catch (const Error& e) {
            out.stop_reason = e.what();
            return out;
        }
        const double eig_next = lowest_jacobian_eigenvalue(next);

        if (eig_prev * eig_next < 0.0) {
            // lowest eigenvalue crossed zero: bisect for the bifurcation point
            double lo = current.lambda, hi = lam;
            double eig_lo = eig_prev;
            StationaryResult probe = current;
            for (int it = 0; it < 60 && (hi - lo) > 1e-10 * (1.0 + hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                try {
                    probe = solve_mean_field(probe.v_star, mid, tol, opts);
                } catch (const Error&) {
                    break;  // keep the bracket; report the closest endpoint
                }
                const double eig_mid = lowest_jacobian_eigenvalue(probe);
                if (eig_lo * eig_mid <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    eig_lo = eig_mid;
                }
            }
            BranchPoint cross;
            cross.result = probe;
            cross.min_singular_value = smallest_abs_jacobian_eigenvalue(probe);
            cross.flagged = cross.min_singular_value <
                            flag_threshold(probe.lambda, area);
            out.points.push_back(cross);
        }

        BranchPoint point;
        point.result = next;
        point.min_singular_value = smallest_abs_jacobian_eigenvalue(next);
        point.flagged =
            point.min_singular_value < flag_threshold(lam, area);
        out.points.push_back(point);

        current = std::move(next);
        eig_prev = eig_next;
    }
    out.completed = true;
    return out;
}

}  // namespace torusflow
