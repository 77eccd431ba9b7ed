#pragma once

#include "stocs/scenario.hpp"
#include "stocs/stocs.hpp"

namespace stocs {

struct VerifyTolerances {
  double penetration = 1e-4;      // per-step, over all boundary points
  double balance_l1 = 1e-4;       // per-step wrench residual
  double comp_gap_per_pair = 1e-4;  // sum bound is this times n_cc
  double dynamics_defect = 1e-10;
};

struct VerifyReport {
  bool pass = false;
  bool penetration_ok = false;
  bool balance_ok = false;
  bool comp_ok = false;
  bool dynamics_ok = false;

  double max_penetration = 0.0;
  double max_balance_l1 = 0.0;
  double comp_gap_sum = 0.0;
  double max_dynamics_defect = 0.0;
  int n_cc = 0;
  int worst_penetration_step = -1;
  int worst_balance_step = -1;

  struct Step {
    double penetration = 0.0;
    double balance_l1 = 0.0;
    double comp_gap = 0.0;
  };
  std::vector<Step> steps;
};

// Independent recheck of a trajectory against the scenario: penetration over
// every boundary point, per-step quasi-static balance, complementarity gap of
// the instantiated pairs, and the pose-integration defect. Reuses only the
// contact/geometry evaluators, not the assembled problem.
VerifyReport verify_trajectory(const Scenario& scn, const ManipulationMode* mode,
                               const std::vector<TrajectoryState>& trajectory,
                               const IndexSet& index_set, double dt,
                               const VerifyTolerances& tol = {});

std::string format_verify_report(const VerifyReport& r);
std::string format_verify_steps(const VerifyReport& r);

}  // namespace stocs
