#ifndef TORUSFLOW_INITIAL_DATA_HPP
#define TORUSFLOW_INITIAL_DATA_HPP

#include <memory>
#include <string>
#include <vector>

#include "torusflow/grid.hpp"

namespace torusflow {

/// One harmonic of the initial data: amp_cos*cos(2 pi (m x/a + n y/b)) +
/// amp_sin*sin(...).
struct ModeTerm {
    int m = 0;
    int n = 0;
    double amp_cos = 0.0;
    double amp_sin = 0.0;
};

/// Initial data w0 = log(lambda/|Omega|) + harmonics + low-pass noise.
/// Parsed from preset strings like
///   "constant"
///   "constant+cos_x:0.1+sin_y:0.05"
///   "constant+mode:2:1:0.05:0+noise:0.01"
/// A space may stand in for the first ':' ("constant+cos_x 0.1").
struct InitSpec {
    std::vector<ModeTerm> modes;
    double noise_amplitude = 0.0;
    int noise_kmax = 4;
};

InitSpec parse_init_spec(const std::string& text);

/// Deterministic low-pass noise, identical across platforms for a seed.
Field random_lowpass(std::shared_ptr<const TorusGrid> grid, unsigned long seed,
                     double amplitude, int kmax);

Field build_initial_w(std::shared_ptr<const TorusGrid> grid, double lambda,
                      const InitSpec& spec, unsigned long noise_seed);

}  // namespace torusflow

#endif
