#include "torusflow/linops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

#include "torusflow/errors.hpp"
#include "torusflow/krylov.hpp"

namespace torusflow {

namespace {

Field subtract_mean(const Field& f) { return f - mean(f); }

double kernel_threshold_for(const LinearOperatorSpec& spec) {
    return 1e-6 * (1.0 + spec.lambda / spec.u_star.grid().area());
}

}  // namespace

Field apply(const LinearOperatorSpec& spec, const Field& phi) {
    switch (spec.kind) {
        case OperatorKind::L:
        case OperatorKind::M: {
            return (-1.0 * laplacian(phi)) - (spec.u_star * phi);
        }
        case OperatorKind::B: {
            Field p = subtract_mean(phi);
            Field core = (-1.0 * laplacian(p)) - (spec.u_star * p);
            const double coupling = dot(p, spec.u_star) / spec.lambda;
            Field out = axpy(coupling, spec.u_star, core);
            return subtract_mean(out);
        }
    }
    throw Error("unknown operator kind");
}

namespace {

// Dense assembly in the nodal basis. For B the constant direction, removed by
// the projection sandwich, is shifted to the top of the spectrum so it cannot
// masquerade as kernel.
Eigen::MatrixXd assemble_dense(const LinearOperatorSpec& spec, double* shift_out) {
    const TorusGrid& g = spec.u_star.grid();
    const int n = g.size();
    Eigen::MatrixXd A(n, n);
    Field e(spec.u_star.grid_ptr());
    for (int j = 0; j < n; ++j) {
        std::fill(e.values().begin(), e.values().end(), 0.0);
        e[j] = 1.0;
        Field col = apply(spec, e);
        for (int i = 0; i < n; ++i) A(i, j) = col[i];
    }
    double shift = 0.0;
    if (spec.kind == OperatorKind::B) {
        auto xi2 = g.xi_sq();
        const double xi2_max = *std::max_element(xi2.begin(), xi2.end());
        shift = xi2_max + std::abs(max_value(spec.u_star)) +
                std::abs(spec.lambda) / g.area() + 10.0;
        // constant projector has matrix entries 1/n in the nodal basis
        A.array() += shift / n;
    }
    if (shift_out) *shift_out = shift;
    A = 0.5 * (A + A.transpose()).eval();
    return A;
}

SpectrumReport spectrum_dense(const LinearOperatorSpec& spec, int k) {
    const TorusGrid& g = spec.u_star.grid();
    const int n = g.size();
    double shift = 0.0;
    Eigen::MatrixXd A = assemble_dense(spec, &shift);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) {
        throw EigsNotConverged("dense eigensolver failed");
    }

    SpectrumReport rep;
    const double inv_sqrt_cell = 1.0 / std::sqrt(g.cell_area());
    const int kk = std::min(k, spec.kind == OperatorKind::B ? n - 1 : n);
    rep.eigenvalues.reserve(kk);
    rep.eigenfields.reserve(kk);
    for (int i = 0; i < kk; ++i) {
        rep.eigenvalues.push_back(es.eigenvalues()[i]);
        Field f(spec.u_star.grid_ptr());
        for (int j = 0; j < n; ++j) {
            f[j] = es.eigenvectors()(j, i) * inv_sqrt_cell;
        }
        rep.eigenfields.push_back(std::move(f));
    }
    return rep;
}

// Shift-inverted Lanczos with full reorthogonalization. The inverse is
// applied by preconditioned CG on the SPD operator A + sigma.
SpectrumReport spectrum_lanczos(const LinearOperatorSpec& spec, int k,
                                const SpectrumOptions& opts) {
    const TorusGrid& g = spec.u_star.grid();
    auto grid = spec.u_star.grid_ptr();
    const int n = g.size();
    const double sigma = std::max(0.0, max_value(spec.u_star)) + 1.0;
    const double mean_u = mean(spec.u_star);

    auto shifted_apply = [&](std::span<const double> x, std::span<double> y) {
        Field fx(grid);
        std::copy(x.begin(), x.end(), fx.values().begin());
        Field fy = apply(spec, fx);
        for (int i = 0; i < n; ++i) y[i] = fy[i] + sigma * x[i];
        if (spec.kind == OperatorKind::B) {
            // keep the iteration inside the zero-mean subspace
            double m = 0.0;
            for (int i = 0; i < n; ++i) m += y[i];
            m /= n;
            for (int i = 0; i < n; ++i) y[i] -= m;
        }
    };
    auto precond = [&](std::span<const double> x, std::span<double> y) {
        Field fx(grid);
        std::copy(x.begin(), x.end(), fx.values().begin());
        Field fy = solve_helmholtz(fx, std::max(1.0, sigma - mean_u), 1.0);
        std::copy(fy.values().begin(), fy.values().end(), y.begin());
    };
    auto inv_apply = [&](const std::vector<double>& b, std::vector<double>& x) {
        std::fill(x.begin(), x.end(), 0.0);
        auto res = krylov::pcg(shifted_apply, precond, b, x, 1e-12, 10 * n);
        if (!res.converged) {
            throw EigsNotConverged("inner CG failed in shift-inverted Lanczos");
        }
    };

    const int m_max = std::min(n - 2, std::max(4 * k + 20, opts.max_subspace));
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    if (spec.kind == OperatorKind::B) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= n;
        for (auto& x : v) x -= m;
    }
    auto vnorm = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double t : x) s += t * t;
        return std::sqrt(s);
    };
    auto vdot = [](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    };
    {
        const double nv = vnorm(v);
        for (auto& x : v) x /= nv;
    }

    SpectrumReport rep;
    std::vector<double> w(n);
    for (int j = 0; j < m_max; ++j) {
        basis.push_back(v);
        inv_apply(v, w);
        double a = vdot(w, v);
        alpha.push_back(a);
        // full reorthogonalization (twice for round-off)
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                const double c = vdot(w, q);
                for (int i = 0; i < n; ++i) w[i] -= c * q[i];
            }
        }
        const double bnext = vnorm(w);
        const int m = j + 1;

        const bool check_now = (m >= 2 * k + 2 && m % 10 == 0) ||
                               bnext <= 1e-13 || m == m_max;
        if (check_now) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // largest theta of (A+sigma)^{-1} <-> smallest eigenvalues of A
            std::vector<std::pair<double, int>> order;
            for (int i = 0; i < m; ++i) order.push_back({es.eigenvalues()[i], i});
            std::sort(order.rbegin(), order.rend());

            const int kk = std::min(k, m);
            std::vector<double> evals;
            std::vector<Field> efields;
            bool all_ok = true;
            for (int i = 0; i < kk; ++i) {
                const double theta = order[i].first;
                if (!(theta > 0.0)) {
                    all_ok = false;
                    break;
                }
                const double lam = 1.0 / theta - sigma;
                Field f(grid, 0.0);
                for (int jj = 0; jj < m; ++jj) {
                    const double c = es.eigenvectors()(jj, order[i].second);
                    for (int ii = 0; ii < n; ++ii) f[ii] += c * basis[jj][ii];
                }
                const double nf = norm_l2(f);
                f = (1.0 / nf) * f;
                Field r = apply(spec, f) - (lam * f);
                if (norm_l2(r) > opts.residual_tol * (1.0 + std::abs(lam))) {
                    all_ok = false;
                    break;
                }
                evals.push_back(lam);
                efields.push_back(std::move(f));
            }
            if (all_ok && static_cast<int>(evals.size()) == kk) {
                rep.eigenvalues = std::move(evals);
                rep.eigenfields = std::move(efields);
                return rep;
            }
            if (m == m_max || bnext <= 1e-13) {
                throw EigsNotConverged(
                    "Lanczos subspace exhausted before convergence");
            }
        }
        beta.push_back(bnext);
        for (int i = 0; i < n; ++i) v[i] = w[i] / bnext;
    }
    throw EigsNotConverged("Lanczos iteration budget exhausted");
}

void classify_kernel(SpectrumReport& rep, double threshold) {
    rep.kernel_threshold = threshold;
    rep.kernel_dim = 0;
    rep.kernel_basis.clear();
    rep.smallest_abs_eigenvalue =
        rep.eigenvalues.empty()
            ? 0.0
            : std::abs(rep.eigenvalues.front());
    for (size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        rep.smallest_abs_eigenvalue =
            std::min(rep.smallest_abs_eigenvalue, std::abs(rep.eigenvalues[i]));
        if (std::abs(rep.eigenvalues[i]) < threshold) {
            ++rep.kernel_dim;
            rep.kernel_basis.push_back(rep.eigenfields[i]);
        }
    }
    rep.nondegenerate = rep.kernel_dim == 0;
}

}  // namespace

SpectrumReport spectrum(const LinearOperatorSpec& spec, int k,
                        const SpectrumOptions& opts) {
    const TorusGrid& g = spec.u_star.grid();
    if (min_value(spec.u_star) <= 0.0) {
        throw NonPositiveDensity("operator base density must be positive");
    }
    EigsMethod method = opts.method;
    if (method == EigsMethod::automatic) {
        method = (g.nx() <= 64 && g.ny() <= 64) ? EigsMethod::dense
                                                : EigsMethod::lanczos;
    }
    SpectrumReport rep = method == EigsMethod::dense
                             ? spectrum_dense(spec, k)
                             : spectrum_lanczos(spec, k, opts);
    classify_kernel(rep, kernel_threshold_for(spec));
    return rep;
}

NondegeneracyReport nondegeneracy_check(const Field& u_star, double lambda,
                                        const SpectrumOptions& opts) {
    LinearOperatorSpec spec{OperatorKind::B, u_star, lambda};
    int k = 8;
    const int n = u_star.grid().size();
    SpectrumReport rep;
    // enlarge k until the kernel is strictly inside the computed window
    for (;;) {
        rep = spectrum(spec, k, opts);
        if (rep.kernel_dim < static_cast<int>(rep.eigenvalues.size()) ||
            k >= n - 1) {
            break;
        }
        k = std::min(n - 1, 2 * k);
    }

    NondegeneracyReport out;
    out.nondegenerate = rep.nondegenerate;
    out.kernel_dim = rep.kernel_dim;
    out.smallest_abs_eigenvalue = rep.smallest_abs_eigenvalue;
    out.kernel_basis = rep.kernel_basis;
    for (const Field& phi : rep.kernel_basis) {
        // psi = phi - (1/lambda) int u* phi  solves -lap psi = u* psi
        const double c = dot(u_star, phi) / lambda;
        Field psi = phi - c;
        Field resid = (-1.0 * laplacian(psi)) - (u_star * psi);
        out.max_witness_residual =
            std::max(out.max_witness_residual, norm_l2(resid));
        out.max_witness_mass_orthogonality = std::max(
            out.max_witness_mass_orthogonality, std::abs(dot(psi, u_star)));
        out.witnesses.push_back(std::move(psi));
    }
    return out;
}

Field projector_P(std::span<const Field> basis, const Field& f) {
    Field out(f.grid_ptr(), 0.0);
    for (const Field& phi : basis) {
        out = axpy(dot(f, phi), phi, out);
    }
    return out;
}

double m_coercivity_constant(const Field& u_star, double lambda, int samples,
                             unsigned seed) {
    const TorusGrid& g = u_star.grid();
    auto grid = u_star.grid_ptr();
    LinearOperatorSpec m_spec{OperatorKind::M, u_star, lambda};
    const double u_norm_sq = dot(u_star, u_star);

    auto ratio_for = [&](const Field& phi_raw) -> double {
        // project onto the u*-orthogonal subspace
        Field phi = axpy(-dot(phi_raw, u_star) / u_norm_sq, u_star, phi_raw);
        const double nv = norm_V(phi);
        if (nv < 1e-10) return 0.0;
        const double denom = norm_Vstar(apply(m_spec, phi));
        if (denom < nv * 1e-12) return 1e300;
        return nv / denom;
    };

    const int k = std::min(g.size() - 1, 30);
    SpectrumReport rep = spectrum(m_spec, k);
    double best = 0.0;
    for (const Field& phi : rep.eigenfields) {
        best = std::max(best, ratio_for(phi));
    }

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < samples; ++s) {
        Field f(grid);
        for (int i = 0; i < f.size(); ++i) f[i] = u(rng);
        // smooth the sample so the ratio is not dominated by Nyquist noise
        f = solve_helmholtz(f, 1.0, 1.0);
        best = std::max(best, ratio_for(f));
    }
    if (best > 1e8) {
        throw DegenerateState(
            "coercivity estimate diverged: base state is degenerate");
    }
    return best;
}

}  // namespace torusflow
