#pragma once

#include <string>

#include "stocs/planner.hpp"
#include "stocs/scenario.hpp"
#include "stocs/stocs.hpp"

namespace stocs {

// Deterministic (byte-stable) SVG renderings. Coordinates printed with %.6f.

// Environment, object silhouettes along the trajectory (start faint, end
// strong), and contact-force arrows at each knot.
std::string render_trajectory_svg(const Scenario& scn, const std::vector<TrajectoryState>& traj,
                                  const IndexSet& index_set);

// Search tree: edge waypoint polylines colored by mode, nodes as bold red
// dots, solution path emphasized.
std::string render_tree_svg(const Scenario& scn, const PlannerResult& result);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace stocs
