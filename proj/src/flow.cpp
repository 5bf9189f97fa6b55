#include "torusflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "torusflow/errors.hpp"
#include "torusflow/functionals.hpp"
#include "torusflow/krylov.hpp"

namespace torusflow {

Field rhs(const Field& w, double lambda, bool dealias_products) {
    const double c = lambda / w.grid().area();
    Field lap = laplacian(w);
    Field out(w.grid_ptr());
    for (int i = 0; i < w.size(); ++i) {
        const double ew = std::exp(w[i]);
        out[i] = (lap[i] + ew - c) / ew;
    }
    if (dealias_products) out = dealias(out);
    return out;
}

double stable_dt(const Field& w, double dt_safety) {
    const double h = w.grid().min_spacing();
    const double min_u = std::exp(min_value(w));
    return dt_safety * min_u * h * h / 4.0;
}

namespace {

double mass_of(const Field& w) { return integral(exp(w)); }

Field renormalized(const Field& w, double lambda) {
    return w + std::log(lambda / mass_of(w));
}

Field rk4_advance(const Field& w, double lambda, double dt, bool dealias_products) {
    Field k1 = rhs(w, lambda, dealias_products);
    Field k2 = rhs(axpy(0.5 * dt, k1, w), lambda, dealias_products);
    Field k3 = rhs(axpy(0.5 * dt, k2, w), lambda, dealias_products);
    Field k4 = rhs(axpy(dt, k3, w), lambda, dealias_products);
    Field out(w.grid_ptr());
    for (int i = 0; i < w.size(); ++i) {
        out[i] = w[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return out;
}

// Backward Euler on d(e^w)/dt = lap w + e^w - lambda/|Omega|, solved by a
// quasi-Newton iteration whose linear systems (diag(e^w) - dt*lap) are SPD
// and handled by spectrally preconditioned CG.
Field semi_implicit_advance(const Field& w0, double lambda, double dt,
                            const FlowConfig& config) {
    const TorusGrid& g = w0.grid();
    auto grid = w0.grid_ptr();
    const double c = lambda / g.area();
    const int n = g.size();
    Field ew0 = exp(w0);

    auto residual = [&](const Field& w) {
        Field lap = laplacian(w);
        Field r(grid);
        for (int i = 0; i < n; ++i) {
            const double ew = std::exp(w[i]);
            r[i] = ew - ew0[i] - dt * (lap[i] + ew - c);
        }
        return r;
    };

    Field w = w0;
    const double scale = lambda / g.area() + 1.0;
    for (int it = 0; it < config.si_newton_max; ++it) {
        Field r = residual(w);
        if (norm_l2(r) <= config.si_newton_tol * scale) break;
        Field d = exp(w);
        const double d_mean = mean(d);
        auto apply_a = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            Field lap = laplacian(fx);
            for (int i = 0; i < n; ++i) y[i] = d[i] * x[i] - dt * lap[i];
        };
        auto precond = [&](std::span<const double> x, std::span<double> y) {
            Field fx(grid);
            std::copy(x.begin(), x.end(), fx.values().begin());
            Field s = solve_helmholtz(fx, d_mean, dt);
            std::copy(s.values().begin(), s.values().end(), y.begin());
        };
        std::vector<double> delta(n, 0.0);
        std::vector<double> b(n);
        for (int i = 0; i < n; ++i) b[i] = -r[i];
        auto res = krylov::pcg(apply_a, precond, b, delta, config.si_cg_tol,
                               config.si_cg_max);
        if (!res.converged) {
            throw StepRejected("semi-implicit inner solve failed to converge");
        }
        for (int i = 0; i < n; ++i) w[i] += delta[i];
    }
    Field r = residual(w);
    if (norm_l2(r) > 100.0 * config.si_newton_tol * scale) {
        throw StepRejected("semi-implicit iteration did not reach tolerance");
    }
    return w;
}

FlowState step_checked(const FlowState& state, double dt,
                       const FlowConfig& config, double energy_old,
                       double* energy_new_out) {
    if (!(dt > 0.0)) throw Error("step requires dt > 0");
    Field w_new = config.scheme == FlowScheme::explicit_rk4
                      ? rk4_advance(state.w, state.lambda, dt,
                                    config.dealias_products)
                      : semi_implicit_advance(state.w, state.lambda, dt,
                                              config);
    if (!w_new.all_finite()) {
        throw StepRejected("state left the finite range");
    }
    if (config.renormalize_mass) {
        w_new = renormalized(w_new, state.lambda);
    }
    if (!(std::exp(min_value(w_new)) > 0.0)) {
        throw StepRejected("density positivity lost");
    }
    const double energy_new = energy_E(w_new, state.lambda);
    if (energy_new >
        energy_old + config.energy_increase_tol * (1.0 + std::abs(energy_old))) {
        std::ostringstream msg;
        msg << "energy increased by " << energy_new - energy_old;
        throw StepRejected(msg.str());
    }
    if (energy_new_out) *energy_new_out = energy_new;
    return FlowState{state.t + dt, std::move(w_new), state.lambda};
}

}  // namespace

FlowState step(const FlowState& state, double dt, const FlowConfig& config) {
    return step_checked(state, dt, config, energy_E(state.w, state.lambda),
                        nullptr);
}

TrajectoryRecord probe(const FlowState& state, const Field* w_reference,
                       bool dealias_products) {
    TrajectoryRecord r;
    r.t = state.t;
    const Field& w = state.w;
    Field grad = first_variation_E(w, state.lambda);
    Field wt = rhs(w, state.lambda, dealias_products);
    Field ew = exp(w);
    r.energy_E = energy_E(w, state.lambda);
    r.grad_E_l2 = norm_l2(grad);
    r.grad_E_Vstar = norm_Vstar(grad);
    r.mass = integral(ew);
    r.min_u = min_value(ew);
    r.max_u = max_value(ew);
    r.dissipation = dot(ew * wt, wt);
    r.wt_l2 = norm_l2(wt);
    r.bc_max = max_value(wt);
    if (w_reference) {
        Field diff = w - *w_reference;
        r.dist_l2 = norm_l2(diff);
        r.dist_V = norm_V(diff);
    }
    return r;
}

FlowResult run_flow(const Field& w0, double lambda, const FlowConfig& config,
                    const Field* w_reference) {
    if (!(lambda > 0.0)) throw Error("run_flow requires lambda > 0");
    if (!(config.dt_initial > 0.0) || !(config.t_end > 0.0)) {
        throw Error("run_flow requires positive dt_initial and t_end");
    }
    FlowResult result;
    if (lambda > 8.0 * std::numbers::pi + 1e-12) {
        result.warnings.push_back(
            "lambda exceeds 8*pi: outside the global-existence range, "
            "long-time behaviour is not guaranteed");
    }

    FlowState state{0.0, renormalized(w0, lambda), lambda};
    if (!state.w.all_finite()) {
        throw NonFiniteState("initial state is not finite");
    }

    auto record_state = [&](const TrajectoryRecord& rec) {
        result.records.push_back(rec);
        if (config.store_snapshots) {
            result.snapshots.emplace_back(state.t, state.w);
        }
    };

    TrajectoryRecord rec = probe(state, w_reference, config.dealias_products);
    record_state(rec);
    double energy_now = rec.energy_E;
    if (rec.grad_E_l2 < config.stop_grad_l2) {
        result.stopped_stationary = true;
        result.final_state = state;
        return result;
    }

    double dt_request = config.dt_initial;
    long step_count = 0;
    double next_record_t =
        config.record_every > 0 ? 0.0 : config.record_dt;

    while (state.t < config.t_end) {
        double dt = dt_request;
        if (config.scheme == FlowScheme::explicit_rk4) {
            dt = std::min(dt, stable_dt(state.w, config.dt_safety));
        }
        dt = std::min(dt, config.t_end - state.t);

        bool accepted = false;
        double energy_next = energy_now;
        for (int attempt = 0; attempt <= config.max_step_retries; ++attempt) {
            try {
                state = step_checked(state, dt, config, energy_now,
                                     &energy_next);
                accepted = true;
                break;
            } catch (const StepRejected& e) {
                dt *= 0.5;
                dt_request = dt;
                if (attempt == config.max_step_retries) {
                    throw PositivityLost(
                        std::string("step retries exhausted: ") + e.what());
                }
            }
        }
        if (!accepted) {
            throw PositivityLost("step retries exhausted");
        }
        energy_now = energy_next;
        dt_request = std::min(dt_request * 1.1, config.dt_initial);
        ++step_count;

        const bool record_now =
            config.record_every > 0
                ? (step_count % config.record_every == 0)
                : (state.t + 1e-12 >= next_record_t);
        const bool at_end = state.t >= config.t_end - 1e-12;
        if (record_now || at_end) {
            if (config.record_every == 0) {
                while (next_record_t <= state.t + 1e-12) {
                    next_record_t += config.record_dt;
                }
            }
            rec = probe(state, w_reference, config.dealias_products);
            record_state(rec);
            if (rec.grad_E_l2 < config.stop_grad_l2) {
                result.stopped_stationary = true;
                break;
            }
        }
    }

    if (!state.w.all_finite()) {
        throw NonFiniteState("flow state is not finite");
    }
    result.final_state = std::move(state);
    return result;
}

void fill_distances(std::vector<TrajectoryRecord>& records,
                    const std::vector<std::pair<double, Field>>& snapshots,
                    const Field& w_reference) {
    size_t si = 0;
    for (auto& rec : records) {
        while (si < snapshots.size() &&
               snapshots[si].first < rec.t - 1e-12) {
            ++si;
        }
        if (si >= snapshots.size()) break;
        if (std::abs(snapshots[si].first - rec.t) <= 1e-9 * (1.0 + rec.t)) {
            Field diff = snapshots[si].second - w_reference;
            rec.dist_l2 = norm_l2(diff);
            rec.dist_V = norm_V(diff);
        }
    }
}

}  // namespace torusflow
