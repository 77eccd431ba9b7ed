#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stocs {

// One run's measurements. Wall time is kept out of the deterministic report
// body and written to a timing sidecar instead.
struct RunReport {
  std::string command;   // stocs | vanilla | plan | ...
  std::string scenario;
  std::string mode;
  uint64_t seed = 0;
  std::string status;
  int outer_iters = 0;
  double avg_index_points = 0.0;
  int nlp_iters_total = 0;
  int tree_nodes = 0;
  int path_nodes = 0;
  int stocs_calls = 0;
  double goal_distance = 0.0;
  double comp_gap_sum = 0.0;
  double balance_l1_max = 0.0;
  double penetration_max = 0.0;
  double wall_time_s = 0.0;
};

// Deterministic key-value body (no timing).
std::string format_report(const RunReport& r);

// Seed-batch aggregate: per-seed rows plus success count and medians.
std::string format_batch_table(const std::vector<RunReport>& rows);

// "wall_time_s <value>" lines keyed like the reports; not byte-stable.
std::string format_timing(const std::vector<RunReport>& rows);

double median(std::vector<double> values);

// Fixed shortest-round-trip float formatting used by all text outputs.
std::string format_double(double v);

}  // namespace stocs
