#include "torusflow/krylov.hpp"

#include <cmath>

#include "torusflow/errors.hpp"

namespace torusflow::krylov {

namespace {

double vdot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double vnorm(std::span<const double> x) { return std::sqrt(vdot(x, x)); }

double true_residual(const ApplyFn& apply_a, std::span<const double> b,
                     std::span<const double> x, double bnorm) {
    std::vector<double> ax(b.size());
    apply_a(x, ax);
    double s = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        const double r = b[i] - ax[i];
        s += r * r;
    }
    return std::sqrt(s) / bnorm;
}

}  // namespace

SolveResult pcg(const ApplyFn& apply_a, const ApplyFn& apply_minv,
                std::span<const double> b, std::span<double> x,
                double rel_tol, int max_iter) {
    const size_t n = b.size();
    const double bnorm = vnorm(b);
    SolveResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> ax(n);
    apply_a(x, ax);
    for (size_t i = 0; i < n; ++i) r[i] -= ax[i];

    std::vector<double> z(n), p(n), ap(n);
    apply_minv(r, z);
    p.assign(z.begin(), z.end());
    double rz = vdot(r, z);

    for (int it = 0; it < max_iter; ++it) {
        apply_a(p, ap);
        const double pap = vdot(p, ap);
        if (!(pap > 0.0)) {
            res.converged = false;
            res.iterations = -1;  // indefiniteness signal
            res.residual = vnorm(r) / bnorm;
            return res;
        }
        const double alpha = rz / pap;
        for (size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res.iterations = it + 1;
        if (vnorm(r) <= rel_tol * bnorm) {
            res.converged = true;
            res.residual = true_residual(apply_a, b, x, bnorm);
            return res;
        }
        apply_minv(r, z);
        const double rz_new = vdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.converged = false;
    res.residual = vnorm(r) / bnorm;
    return res;
}

SolveResult minres(const ApplyFn& apply_a, const ApplyFn& apply_minv,
                   std::span<const double> b, std::span<double> x,
                   double rel_tol, int max_iter) {
    const size_t n = b.size();
    const double bnorm = vnorm(b);
    SolveResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }

    // Preconditioned MINRES with the usual three-term Lanczos recurrence and
    // Givens rotations; |eta| tracks the M^{-1}-norm of the residual.
    std::vector<double> v_prev(n, 0.0), v(n), v_next(n);
    std::vector<double> z(n), az(n);
    std::vector<double> w_prev(n, 0.0), w(n, 0.0), w_next(n);

    apply_a(x, az);
    for (size_t i = 0; i < n; ++i) v[i] = b[i] - az[i];
    apply_minv(v, z);
    double zv = vdot(z, v);
    if (!(zv >= 0.0)) throw Error("minres: preconditioner is not SPD");
    double gamma = std::sqrt(zv);
    if (gamma == 0.0) {
        res.converged = true;
        res.residual = true_residual(apply_a, b, x, bnorm);
        return res;
    }
    double gamma_old = 1.0;
    double eta = gamma;
    const double eta0 = gamma;
    double s_old = 0.0, s = 0.0, c_old = 1.0, c = 1.0;

    for (int it = 0; it < max_iter; ++it) {
        for (size_t i = 0; i < n; ++i) z[i] /= gamma;
        apply_a(z, az);
        const double delta = vdot(az, z);
        for (size_t i = 0; i < n; ++i) {
            v_next[i] =
                az[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_prev[i];
        }
        std::vector<double> z_next(n);
        apply_minv(v_next, z_next);
        const double zv_next = vdot(z_next, v_next);
        if (!(zv_next >= -1e-14 * bnorm * bnorm)) {
            throw Error("minres: preconditioner is not SPD");
        }
        const double gamma_next = std::sqrt(std::max(0.0, zv_next));

        const double a0 = c * delta - c_old * s * gamma;
        const double a1 = std::sqrt(a0 * a0 + gamma_next * gamma_next);
        const double a2 = s * delta + c_old * c * gamma;
        const double a3 = s_old * gamma;
        if (a1 == 0.0) break;  // exact breakdown; x is the best iterate
        const double c_next = a0 / a1;
        const double s_next = gamma_next / a1;

        for (size_t i = 0; i < n; ++i) {
            w_next[i] = (z[i] - a3 * w_prev[i] - a2 * w[i]) / a1;
            x[i] += c_next * eta * w_next[i];
        }
        eta = -s_next * eta;

        std::swap(v_prev, v);
        std::swap(v, v_next);
        std::swap(w_prev, w);
        std::swap(w, w_next);
        z.swap(z_next);
        gamma_old = gamma;
        gamma = gamma_next;
        c_old = c;
        c = c_next;
        s_old = s;
        s = s_next;

        res.iterations = it + 1;
        if (std::abs(eta) <= rel_tol * eta0) {
            res.residual = true_residual(apply_a, b, x, bnorm);
            res.converged = res.residual <= 10.0 * rel_tol;
            if (res.converged) return res;
        }
        if (gamma == 0.0) break;
    }
    res.residual = true_residual(apply_a, b, x, bnorm);
    res.converged = res.residual <= 10.0 * rel_tol;
    return res;
}

}  // namespace torusflow::krylov
