#pragma once

#include <string>

#include "stocs/scenario.hpp"
#include "stocs/stocs.hpp"

namespace stocs {

// Text form of a solved trajectory: "# key value" header lines (scenario name,
// status, dt, mode, index-point table), then one CSV row per knot. All floats
// printed with %.17g so rewrites are byte-identical. See docs/trajectory_csv.md.
std::string format_trajectory_csv(const Scenario& scn, const ManipulationMode* mode,
                                  const StocsResult& result);

void write_trajectory_csv(const std::string& path, const Scenario& scn,
                          const ManipulationMode* mode, const StocsResult& result);

struct LoadedTrajectory {
  std::string scenario_name;
  std::string mode_name;  // empty: none
  StocsStatus status = StocsStatus::NotConverged;
  double dt = 0.1;
  IndexSet index_set;
  std::vector<TrajectoryState> states;
};

LoadedTrajectory read_trajectory_csv(const std::string& path);

}  // namespace stocs
