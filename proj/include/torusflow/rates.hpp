#ifndef TORUSFLOW_RATES_HPP
#define TORUSFLOW_RATES_HPP

#include <span>
#include <string>
#include <vector>

#include "torusflow/flow.hpp"
#include "torusflow/linops.hpp"
#include "torusflow/stationary.hpp"

namespace torusflow {

enum class DecayModel { exponential, algebraic };

struct RateFit {
    DecayModel model = DecayModel::exponential;
    double gamma = 0.0;       // rate of e^{-gamma t}
    double exponent_p = 0.0;  // power of (1+t)^{-p}
    double theta_fit = 0.0;   // back-solved from p = theta/(1-2 theta)
    double r_squared = 0.0;
    double r_squared_other = 0.0;
    bool ambiguous = false;  // model selection margin below 0.01
    double t_lo = 0.0, t_hi = 0.0;
};

struct LojEstimate {
    double theta = 0.0;
    double constant_C = 0.0;
    double r_squared = 0.0;
    int sample_count = 0;
    bool theta_in_range = true;  // theta in (0, 1/2] up to fit tolerance
};

/// Tail selection: records whose ||delta E||_2 lies in [grad_lo, grad_hi]
/// (below the transient, above machine noise). Energy gaps under the
/// round-off floor of E are additionally discarded.
struct FitWindow {
    double grad_lo = 1e-9;
    double grad_hi = 1e-3;
};

/// Least-squares fit of log ||dE||_V* = (1-theta) log(E - E_star) - log C.
LojEstimate estimate_theta(const std::vector<TrajectoryRecord>& records,
                           double E_star, const FitWindow& window = {});
/// Series form used by synthetic-data tests.
LojEstimate estimate_theta_series(std::span<const double> energy_gap,
                                  std::span<const double> grad_vstar);

/// Fit both decay models to the distance series ||w - w*||_2 (falls back to
/// ||dE||_2 when distances are absent) and select by r^2 with a 0.01 margin.
RateFit fit_decay(const std::vector<TrajectoryRecord>& records,
                  const FitWindow& window = {});
RateFit fit_decay_series(std::span<const double> t,
                         std::span<const double> dist);

enum class ConvergenceVerdict { consistent, discrepancy };

struct ClassifyReport {
    ConvergenceVerdict verdict = ConvergenceVerdict::consistent;
    std::string message;
};

/// Cross-check the spectral verdict against the fitted decay model:
/// a nondegenerate state must decay exponentially; a degenerate one may do
/// either (the guarantee is only algebraic).
ClassifyReport classify_convergence(const StationaryResult& stationary,
                                    const SpectrumReport& spectrum,
                                    const RateFit& fit);

struct HSeriesReport {
    std::vector<double> t;
    std::vector<double> H;  // (E - E_star)^theta
    double c_min = 0.0;     // smallest C with ||w_t||_2 <= C (-dH/dt)
    bool inequality_ok = false;
    double integral_wt = 0.0;  // trapezoid of ||w_t||_2 over the tail
    double bound_c_h0 = 0.0;   // c_min * H(t_start)
    bool integral_bounded = false;
};

HSeriesReport h_series(const std::vector<TrajectoryRecord>& records,
                       double E_star, double theta,
                       const FitWindow& window = {});

}  // namespace torusflow

#endif
