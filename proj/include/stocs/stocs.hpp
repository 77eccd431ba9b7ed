#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "stocs/kernels.hpp"
#include "stocs/mpcc.hpp"
#include "stocs/nlp.hpp"

namespace stocs {

struct StocsSettings {
  int n_max = 100;  // outer iteration cap
  double eps_x = 1e-4;
  double eps_gap = 1e-4;
  double eps_s = 1e-4;
  double eps_p = 1e-4;
  std::function<int(int)> s_schedule;  // k -> NLP budget; default min(30+10k, 200)
  int n_ls_max = 20;
  double merit_mu = 1e3;
  double ls_shrink = 0.5;
  int T = 20;
  double dt = 0.1;
  MpccWeights weights;
  SolveSettings nlp;
  bool full_instantiation = false;  // instantiate every boundary point up front
  std::ostream* trace = nullptr;    // per-outer-iteration CSV records
  std::function<bool()> interrupt;

  int schedule(int k) const { return s_schedule ? s_schedule(k) : std::min(30 + 10 * k, 200); }
};

enum class StocsStatus { Converged, Infeasible, NotConverged, Aborted };

const char* to_string(StocsStatus s);

// One knot of the returned trajectory. The final knot (t = T) carries only q.
struct TrajectoryState {
  Pose2 q;
  double theta_unwrapped = 0.0;
  Twist2 qdot;
  Eigen::VectorXd u;
  std::vector<ContactForce> forces;  // one per index-set point
  std::vector<double> slack;         // gamma per point
};

struct StocsStats {
  int outer_iters = 0;
  double avg_index_points = 0.0;  // mean of |Y_k| over outer iterations
  int nlp_iters_total = 0;
  double wall_time_s = 0.0;
};

// Final residuals, computed on the returned (exactly re-integrated) iterate.
struct StocsResiduals {
  double step_norm = 0.0;         // alpha * |step|_2 at the last iteration
  double comp_gap_sum = 0.0;      // sum of |a*b| over instantiated pairs
  double balance_l1_total = 0.0;  // sum over steps
  double balance_l1_max = 0.0;    // worst step
  double penetration_total = 0.0; // sum over steps of deepest penetration
  double penetration_max = 0.0;
};

struct StocsResult {
  StocsStatus status = StocsStatus::NotConverged;
  std::vector<TrajectoryState> trajectory;  // T+1 states
  IndexSet index_set;
  double dt = 0.1;
  StocsStats stats;
  StocsResiduals residuals;
};

// Straight-line seed: poses interpolated start->goal (shortest-path angle),
// velocities by exact finite differences, forces zero, slide location centered.
Eigen::VectorXd initialize_trajectory(const Pose2& q_start, const Pose2& q_goal,
                                      const ManipulationMode* mode, int T, double dt);

// Deepest-penetration / closest-point selection: for each trajectory pose, the
// boundary point minimizing the gap, deduplicated (1e-6) against existing and
// each other; ties resolved to the lowest boundary-point index. A pose whose
// minimum is attained (within 1e-5) across a spatially extended patch is in
// face contact; such poses contribute the patch's two extreme points, since
// any single selection would leave the patch's far end unsupported forever.
std::vector<IndexPoint> max_violation_oracle(const ObjectModel& obj,
                                             const kernels::EnvData& env_data,
                                             const kernels::PointsSoA& boundary,
                                             const std::vector<Pose2>& poses,
                                             const IndexSet& existing);

// Objective plus mu * l1 of: equality residuals, negative inequality parts,
// complementarity products, and the per-step deepest penetration over the
// whole boundary (not just instantiated points).
double merit(const MpccProblem& problem, const kernels::EnvData& env_data,
             const kernels::PointsSoA& boundary, const Eigen::VectorXd& x, double mu);

// The exchange-method outer loop. mode may be null (environment forces only).
StocsResult run(const Scenario& scn, const ManipulationMode* mode, const Pose2& q_start,
                const Pose2& q_goal, const StocsSettings& settings);

}  // namespace stocs
