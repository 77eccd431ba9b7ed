#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "stocs/stocs.hpp"
#include "stocs/verify.hpp"

namespace stocs {

// Deterministic uniform source: one fixed mapping from engine output to [0,1).
struct Rng {
  std::mt19937_64 gen;

  explicit Rng(uint64_t seed) : gen(seed) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int n) { return static_cast<int>(uniform() * n); }  // [0, n)
};

struct PlannerSettings {
  double p1 = 0.5;             // uniform sample
  double p2 = 0.3;             // stable-angle sample; remainder goes to the goal
  double w1 = 1.0, w2 = 1.0;   // tree metric weights
  double W = 5.0;              // steering objective weight
  double c_max = 2.0;
  int max_extensions = 500;    // steering calls, not raw loop trips
  double goal_tol = 0.02;
  double temperature_init = 0.1;
  double temp_rate = 2.0;
  int n_fail_max = 5;
  uint64_t rng_seed = 0;
  StocsSettings stocs;         // defaulted to the short-horizon steering profile
  std::function<bool()> interrupt;

  PlannerSettings() {
    stocs.n_max = 10;
    stocs.T = 5;
    stocs.dt = 0.1;
  }
};

struct TreeNode {
  int id = 0;
  Pose2 q;
  int parent = -1;
  int mode_index = -1;  // into Scenario.modes; -1 at the root
  StocsResult incoming; // empty at the root
  double theta_unwrapped = 0.0;
};

struct PlannerResult {
  bool found = false;
  std::vector<TreeNode> nodes;
  std::vector<int> path;  // node ids, root first; empty unless found
  int stocs_calls = 0;
  int loop_trips = 0;
  int transition_rejects = 0;
  int mode_rejects = 0;
  double wall_time_s = 0.0;
};

double se2_distance(const Pose2& a, const Pose2& b, double w1, double w2);

enum class SampleBranch { Uniform, StableAngle, Goal };

Pose2 sample_configuration(const PlannerSettings& s, Rng& rng,
                           const std::vector<double>& stable_angles, const Pose2& q_goal,
                           const ProblemBounds& bounds, SampleBranch* branch_out = nullptr);

struct TemperatureState {
  double temp = 0.1;
  int consecutive_fails = 0;
};

// T-RRT transition filter on the goal-distance cost landscape.
bool transition_test(const Pose2& q_parent, const Pose2& q_ideal, const Pose2& q_goal,
                     TemperatureState& ts, const PlannerSettings& s, Rng& rng);

// Static equilibrium under environment contact alone: feasibility of the
// one-step, zero-motion contact problem at fixed q.
bool stability_test(const Scenario& scn, const Pose2& q);

// Pose-keyed cache (1e-4 quantization) around stability_test.
class StabilityCache {
 public:
  bool query(const Scenario& scn, const Pose2& q);

 private:
  std::unordered_map<uint64_t, bool> cache_;
};

// Indices of modes admissible at q; FixedPoints need the orientation to match
// an admissible angle (1e-3) and their points out of contact, OnePointSlide
// needs its face out of contact.
std::vector<int> admissible_modes(const Scenario& scn, const Pose2& q);

PlannerResult plan(const Scenario& scn, const Pose2& q_init, const Pose2& q_goal,
                   const PlannerSettings& settings);

}  // namespace stocs
