#include "torusflow/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/errors.hpp"

namespace torusflow {

namespace {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

double energy_floor(double e_star) {
    return 1e3 * std::numeric_limits<double>::epsilon() *
           (1.0 + std::abs(e_star));
}

}  // namespace

LojEstimate estimate_theta_series(std::span<const double> energy_gap,
                                  std::span<const double> grad_vstar) {
    if (energy_gap.size() < 10) {
        throw InsufficientData("theta fit needs at least 10 usable records");
    }
    std::vector<double> x, y;
    x.reserve(energy_gap.size());
    for (size_t i = 0; i < energy_gap.size(); ++i) {
        x.push_back(std::log(energy_gap[i]));
        y.push_back(std::log(grad_vstar[i]));
    }
    LinearFit fit = least_squares(x, y);
    LojEstimate est;
    est.theta = 1.0 - fit.slope;
    est.constant_C = std::exp(-fit.intercept);
    est.r_squared = fit.r_squared;
    est.sample_count = static_cast<int>(energy_gap.size());
    est.theta_in_range = est.theta > 0.0 && est.theta <= 0.5 + 0.05;
    return est;
}

LojEstimate estimate_theta(const std::vector<TrajectoryRecord>& records,
                           double E_star, const FitWindow& window) {
    const double floor = energy_floor(E_star);
    std::vector<double> gap, grad;
    double prev_e = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (r.energy_E >
            prev_e + 1e-12 * (1.0 + std::abs(prev_e))) {
            throw NonMonotoneEnergy("energy record is not non-increasing");
        }
        prev_e = r.energy_E;
        if (r.grad_E_l2 < window.grad_lo || r.grad_E_l2 > window.grad_hi) {
            continue;
        }
        const double g = r.energy_E - E_star;
        if (g <= floor || !(r.grad_E_Vstar > 0.0)) continue;
        gap.push_back(g);
        grad.push_back(r.grad_E_Vstar);
    }
    return estimate_theta_series(gap, grad);
}

RateFit fit_decay_series(std::span<const double> t,
                         std::span<const double> dist) {
    if (t.size() < 10) {
        throw InsufficientData("decay fit needs at least 10 usable records");
    }
    std::vector<double> logd, tt, log1pt;
    for (size_t i = 0; i < t.size(); ++i) {
        logd.push_back(std::log(dist[i]));
        tt.push_back(t[i]);
        log1pt.push_back(std::log1p(t[i]));
    }
    LinearFit expo = least_squares(tt, logd);
    LinearFit alge = least_squares(log1pt, logd);

    RateFit fit;
    fit.t_lo = t.front();
    fit.t_hi = t.back();
    fit.gamma = -expo.slope;
    fit.exponent_p = -alge.slope;
    fit.theta_fit = fit.exponent_p / (1.0 + 2.0 * fit.exponent_p);
    if (expo.r_squared >= alge.r_squared) {
        fit.model = DecayModel::exponential;
        fit.r_squared = expo.r_squared;
        fit.r_squared_other = alge.r_squared;
    } else {
        fit.model = DecayModel::algebraic;
        fit.r_squared = alge.r_squared;
        fit.r_squared_other = expo.r_squared;
    }
    fit.ambiguous = std::abs(expo.r_squared - alge.r_squared) < 0.01;
    return fit;
}

RateFit fit_decay(const std::vector<TrajectoryRecord>& records,
                  const FitWindow& window) {
    std::vector<double> t, dist;
    const bool have_dist =
        !records.empty() && std::isfinite(records.back().dist_l2);
    for (const auto& r : records) {
        if (r.grad_E_l2 < window.grad_lo || r.grad_E_l2 > window.grad_hi) {
            continue;
        }
        const double d = have_dist ? r.dist_l2 : r.grad_E_l2;
        if (!(d > 0.0) || !std::isfinite(d)) continue;
        t.push_back(r.t);
        dist.push_back(d);
    }
    return fit_decay_series(t, dist);
}

ClassifyReport classify_convergence(const StationaryResult& stationary,
                                    const SpectrumReport& spectrum,
                                    const RateFit& fit) {
    ClassifyReport rep;
    std::ostringstream msg;
    const bool exp_fit = fit.model == DecayModel::exponential;
    if (spectrum.nondegenerate) {
        if (exp_fit) {
            msg << "nondegenerate state with exponential decay (gamma = "
                << fit.gamma << "): consistent";
            rep.verdict = ConvergenceVerdict::consistent;
        } else {
            msg << "nondegenerate state but algebraic fit selected (r^2 = "
                << fit.r_squared << "): discrepancy, investigate";
            rep.verdict = ConvergenceVerdict::discrepancy;
        }
    } else {
        msg << "degenerate state (kernel dim " << spectrum.kernel_dim
            << "); decay fit is "
            << (exp_fit ? "exponential" : "algebraic")
            << ": consistent with the at-least-algebraic guarantee";
        rep.verdict = ConvergenceVerdict::consistent;
    }
    msg << " [lambda = " << stationary.lambda << "]";
    rep.message = msg.str();
    return rep;
}

HSeriesReport h_series(const std::vector<TrajectoryRecord>& records,
                       double E_star, double theta, const FitWindow& window) {
    if (records.size() < 3) {
        throw InsufficientData("H series needs at least 3 records");
    }
    const double floor = energy_floor(E_star);
    HSeriesReport rep;
    rep.t.reserve(records.size());
    rep.H.reserve(records.size());
    for (const auto& r : records) {
        const double gap = r.energy_E - E_star;
        rep.t.push_back(r.t);
        rep.H.push_back(gap > floor ? std::pow(gap, theta) : 0.0);
    }

    // smallest admissible C over the tail, by centered differences of H
    double c_min = 0.0;
    bool any = false;
    std::vector<size_t> tail_idx;
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.grad_E_l2 >= window.grad_lo && r.grad_E_l2 <= window.grad_hi &&
            rep.H[i] > 0.0) {
            tail_idx.push_back(i);
        }
    }
    for (size_t j = 1; j + 1 < tail_idx.size(); ++j) {
        const size_t i = tail_idx[j];
        const size_t im = tail_idx[j - 1], ip = tail_idx[j + 1];
        const double dh_dt =
            (rep.H[ip] - rep.H[im]) / (rep.t[ip] - rep.t[im]);
        if (dh_dt < 0.0) {
            c_min = std::max(c_min, records[i].wt_l2 / (-dh_dt));
            any = true;
        }
    }
    rep.c_min = c_min;
    rep.inequality_ok = !any || std::isfinite(c_min);

    if (tail_idx.size() >= 2) {
        double integral = 0.0;
        for (size_t j = 1; j < tail_idx.size(); ++j) {
            const size_t i0 = tail_idx[j - 1], i1 = tail_idx[j];
            integral += 0.5 *
                        (records[i0].wt_l2 + records[i1].wt_l2) *
                        (rep.t[i1] - rep.t[i0]);
        }
        rep.integral_wt = integral;
        rep.bound_c_h0 = c_min * rep.H[tail_idx.front()];
        // 1% slack absorbs the O(dt^2) bias of the centered dH/dt estimate
        rep.integral_bounded = integral <= rep.bound_c_h0 * 1.01 ||
                               integral == 0.0;
    } else {
        rep.integral_bounded = true;
    }
    return rep;
}

}  // namespace torusflow
