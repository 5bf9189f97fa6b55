#ifndef TORUSFLOW_IO_HPP
#define TORUSFLOW_IO_HPP

#include <string>
#include <vector>

#include "torusflow/flow.hpp"
#include "torusflow/grid.hpp"

namespace torusflow {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Binary state file. Layout: six little-endian 64-bit floats
/// (a, b, nx, ny, lambda, t) followed by nx*ny row-major w values, also
/// little-endian 64-bit floats.
struct Checkpoint {
    double lambda = 0.0;
    double t = 0.0;
    Field w;
};

void write_checkpoint(const std::string& path, const Field& w, double lambda,
                      double t);
Checkpoint read_checkpoint(const std::string& path);

/// Trajectory CSV. Fixed leading columns
///   t,E,grad_l2,grad_Vstar,mass,min_u,max_u,dissipation,bc_ratio
/// then wt_l2 and, when a reference was set, dist_l2 and dist_V. One header
/// comment line carries the artifact version and config hash.
void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRecord>& records,
                          const std::string& config_hash);
std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path);

/// FNV-1a 64-bit over the canonical config text, as "0x..." hex.
std::string config_hash(const std::string& canonical_text);

}  // namespace torusflow

#endif
