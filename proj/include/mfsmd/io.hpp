#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mfsmd/metrics.hpp"
#include "mfsmd/observables.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

/// Round-trippable decimal form (%.17g).
std::string format_real(double x);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// t,particle,theta_1..theta_d
std::string snapshots_csv(const FlowTrajectory& traj);
/// t,f_id,value
std::string observables_csv(const FlowTrajectory& traj);
/// t,<column>
std::string series_csv(const std::string& column, const std::vector<double>& t,
                       const std::vector<double>& values);
/// t,f_id,residual; row k of `residual` belongs to time t[k].
std::string residual_csv(const std::vector<double>& t, const std::vector<std::string>& ids,
                         const Mat& residual);
/// x1,x2,output for a decision_grid result (row = x2 index, column = x1 index).
std::string grid_csv(const Mat& grid, const GridSpec& spec);

}  // namespace mfsmd
