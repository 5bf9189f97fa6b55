#ifndef TORUSFLOW_FUNCTIONALS_HPP
#define TORUSFLOW_FUNCTIONALS_HPP

#include "torusflow/grid.hpp"

namespace torusflow {

/// Snapshot of every energy seen by the solver at one state w.
struct FunctionalReport {
    double energy_E = 0.0;
    double energy_F = 0.0;
    double energy_J = 0.0;
    double grad_E_l2 = 0.0;
    double grad_E_Vstar = 0.0;
    double mass = 0.0;
};

/// E(w) = int 1/2 |grad w|^2 - e^w + (lambda/|Omega|) w dx.
double energy_E(const Field& w, double lambda);

/// delta E(w) = -laplacian(w) - e^w + lambda/|Omega|.
Field first_variation_E(const Field& w, double lambda);

/// F(u) = int u(log u - 1) dx + 1/2 int u * inv_lap(u) dx, where inv_lap is
/// the zero-mean solution of -laplacian(v) = u - mean(u) taken with the sign
/// of Delta^{-1}. Requires u > 0 pointwise.
double energy_F(const Field& u);

/// J_lambda(v) = 1/2 ||grad v||_2^2 - lambda log int e^v dx, for zero-mean v.
double energy_J(const Field& v, double lambda);

Field u_from_w(const Field& w);
Field w_from_u(const Field& u);
Field v_from_w(const Field& w);
/// u = lambda e^v / int e^v; mass is normalized to lambda exactly.
Field u_from_v(const Field& v, double lambda);

FunctionalReport make_report(const Field& w, double lambda);

}  // namespace torusflow

#endif
