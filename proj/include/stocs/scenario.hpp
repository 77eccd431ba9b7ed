#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "stocs/contact.hpp"
#include "stocs/geometry.hpp"

namespace stocs {

// Variable and constraint limits used when assembling trajectory problems.
struct ProblemBounds {
  double ws_lo_x = -1.0, ws_lo_y = -1.0, ws_hi_x = 1.0, ws_hi_y = 1.0;
  double vel_lin = 1.0;      // |vx|, |vy| bound, m/s
  double vel_ang = 3.141592653589793;  // |omega| bound, rad/s
  double force_max = 100.0;  // zn, zp, zm, un bound, N
  double slide_rate = 2.0;   // manipulator slide speed bound, face fractions/s
};

struct Scenario {
  std::string name;
  ObjectModel object;
  EnvironmentModel environment;
  std::vector<ManipulationMode> modes;
  Pose2 q_init;
  Pose2 q_goal;
  double gravity = 9.8;
  ProblemBounds bounds;

  const ManipulationMode* find_mode(const std::string& mode_name) const;
};

struct ScenarioError : std::runtime_error {
  int line;
  ScenarioError(int line_, const std::string& what_arg)
      : std::runtime_error(what_arg), line(line_) {}
};

// Parses the line-oriented scenario text format (see docs/scenario_format.md).
// Throws ScenarioError with the offending line number.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// Deterministic text form; parse_scenario(serialize_scenario(s)) round-trips.
std::string serialize_scenario(const Scenario& s);

}  // namespace stocs
