#ifndef TORUSFLOW_FLOW_HPP
#define TORUSFLOW_FLOW_HPP

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "torusflow/grid.hpp"

namespace torusflow {

enum class FlowScheme { explicit_rk4, semi_implicit };

struct FlowConfig {
    double dt_initial = 1e-3;
    double t_end = 10.0;
    FlowScheme scheme = FlowScheme::explicit_rk4;
    /// rk4 step bound dt <= dt_safety * min(e^w) * h^2 / 4 (h = min spacing).
    double dt_safety = 0.5;
    bool renormalize_mass = true;
    /// Steps between records; 0 derives it from record_dt.
    int record_every = 0;
    double record_dt = 0.05;
    /// Stop once ||delta E||_2 falls below this.
    double stop_grad_l2 = 1e-11;
    /// Per-step relative slack on energy increase before rejection.
    double energy_increase_tol = 1e-12;
    bool store_snapshots = false;
    bool dealias_products = false;
    int max_step_retries = 12;
    // semi-implicit inner solve
    double si_newton_tol = 1e-12;
    int si_newton_max = 12;
    double si_cg_tol = 1e-12;
    int si_cg_max = 4000;
};

struct FlowState {
    double t = 0.0;
    Field w;
    double lambda = 0.0;
};

struct TrajectoryRecord {
    double t = 0.0;
    double energy_E = 0.0;
    double grad_E_l2 = 0.0;
    double grad_E_Vstar = 0.0;
    double mass = 0.0;
    double min_u = 0.0;
    double max_u = 0.0;
    double dissipation = 0.0;  // int e^w w_t^2
    double wt_l2 = 0.0;
    /// max over x of u_t/u (= w_t), against the bound e^t/(e^t - 1).
    double bc_max = 0.0;
    double dist_l2 = std::numeric_limits<double>::quiet_NaN();
    double dist_V = std::numeric_limits<double>::quiet_NaN();
    double H = std::numeric_limits<double>::quiet_NaN();
};

struct FlowResult {
    std::vector<TrajectoryRecord> records;
    std::vector<std::pair<double, Field>> snapshots;
    FlowState final_state;
    bool stopped_stationary = false;
    std::vector<std::string> warnings;
};

/// w_t = e^{-w} (laplacian(w) + e^w - lambda/|Omega|); equals
/// -e^{-w} * first_variation_E(w, lambda).
Field rhs(const Field& w, double lambda, bool dealias_products = false);

/// rk4 stability bound for the current state.
double stable_dt(const Field& w, double dt_safety);

/// One accepted step of the configured scheme, mass renormalization included.
/// Throws StepRejected when positivity or monotonicity fails.
FlowState step(const FlowState& state, double dt, const FlowConfig& config);

/// Integrate from w0 (mass rescaled to lambda first) until t_end or
/// stationarity. w_reference, when given, fills the distance columns.
FlowResult run_flow(const Field& w0, double lambda, const FlowConfig& config,
                    const Field* w_reference = nullptr);

/// Evaluate one trajectory record at a state.
TrajectoryRecord probe(const FlowState& state, const Field* w_reference,
                       bool dealias_products = false);

/// Recompute the distance columns of records against a reference state using
/// stored snapshots (matched by time).
void fill_distances(std::vector<TrajectoryRecord>& records,
                    const std::vector<std::pair<double, Field>>& snapshots,
                    const Field& w_reference);

}  // namespace torusflow

#endif
