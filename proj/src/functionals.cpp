#include "torusflow/functionals.hpp"

#include <cmath>

#include "torusflow/errors.hpp"

namespace torusflow {

double energy_E(const Field& w, double lambda) {
    const double kinetic = 0.5 * grad_norm_sq(w);
    const double potential = integral(exp(w));
    const double linear = (lambda / w.grid().area()) * integral(w);
    return kinetic - potential + linear;
}

Field first_variation_E(const Field& w, double lambda) {
    Field g = laplacian(w);
    Field ew = exp(w);
    const double c = lambda / w.grid().area();
    Field out(w.grid_ptr());
    for (int i = 0; i < out.size(); ++i) {
        out[i] = -g[i] - ew[i] + c;
    }
    return out;
}

double energy_F(const Field& u) {
    if (min_value(u) <= 0.0) {
        throw NonPositiveDensity("energy_F requires u > 0 pointwise");
    }
    Field entropy(u.grid_ptr());
    for (int i = 0; i < u.size(); ++i) {
        entropy[i] = u[i] * (std::log(u[i]) - 1.0);
    }
    // Delta^{-1} u = -inv_laplacian_zero_mean(u)
    Field lap_inv = -1.0 * inv_laplacian_zero_mean(u);
    return integral(entropy) + 0.5 * dot(u, lap_inv);
}

double energy_J(const Field& v, double lambda) {
    const double m = mean(v);
    const double scale =
        std::max(std::abs(min_value(v)), std::abs(max_value(v)));
    if (std::abs(m) > 1e-8 * (scale > 0.0 ? scale : 1.0)) {
        throw NotZeroMean("energy_J requires a zero-mean potential");
    }
    return 0.5 * grad_norm_sq(v) - lambda * std::log(integral(exp(v)));
}

Field u_from_w(const Field& w) { return exp(w); }

Field w_from_u(const Field& u) {
    if (min_value(u) <= 0.0) {
        throw NonPositiveDensity("w_from_u requires u > 0 pointwise");
    }
    return log(u);
}

Field v_from_w(const Field& w) { return w - mean(w); }

Field u_from_v(const Field& v, double lambda) {
    Field ev = exp(v);
    const double scale = lambda / integral(ev);
    return scale * ev;
}

FunctionalReport make_report(const Field& w, double lambda) {
    FunctionalReport r;
    Field grad = first_variation_E(w, lambda);
    r.energy_E = energy_E(w, lambda);
    r.energy_F = energy_F(u_from_w(w));
    r.energy_J = energy_J(v_from_w(w), lambda);
    r.grad_E_l2 = norm_l2(grad);
    r.grad_E_Vstar = norm_Vstar(grad);
    r.mass = integral(exp(w));
    return r;
}

}  // namespace torusflow
