#include "stocs/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace stocs {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_report(const RunReport& r) {
  std::ostringstream o;
  o << "command " << r.command << '\n';
  o << "scenario " << r.scenario << '\n';
  if (!r.mode.empty()) o << "mode " << r.mode << '\n';
  o << "seed " << r.seed << '\n';
  o << "status " << r.status << '\n';
  if (r.command == "plan") {
    o << "tree_nodes " << r.tree_nodes << '\n';
    o << "path_nodes " << r.path_nodes << '\n';
    o << "stocs_calls " << r.stocs_calls << '\n';
    o << "goal_distance " << format_double(r.goal_distance) << '\n';
  } else {
    o << "outer_iters " << r.outer_iters << '\n';
    o << "avg_index_points " << format_double(r.avg_index_points) << '\n';
    o << "nlp_iters_total " << r.nlp_iters_total << '\n';
    o << "goal_distance " << format_double(r.goal_distance) << '\n';
    o << "comp_gap_sum " << format_double(r.comp_gap_sum) << '\n';
    o << "balance_l1_max " << format_double(r.balance_l1_max) << '\n';
    o << "penetration_max " << format_double(r.penetration_max) << '\n';
  }
  return o.str();
}

std::string format_batch_table(const std::vector<RunReport>& rows) {
  std::ostringstream o;
  o << "seed,status,tree_nodes,path_nodes,stocs_calls,goal_distance\n";
  int success = 0;
  std::vector<double> nodes, path, calls;
  for (const RunReport& r : rows) {
    const bool ok = r.status == "Found";
    o << r.seed << ',' << r.status << ',' << r.tree_nodes << ',' << r.path_nodes << ','
      << r.stocs_calls << ',' << format_double(r.goal_distance) << '\n';
    if (ok) {
      ++success;
      nodes.push_back(r.tree_nodes);
      path.push_back(r.path_nodes);
      calls.push_back(r.stocs_calls);
    }
  }
  o << "success " << success << '/' << rows.size() << '\n';
  if (success > 0) {
    o << "median_tree_nodes " << format_double(median(nodes)) << '\n';
    o << "median_path_nodes " << format_double(median(path)) << '\n';
    o << "median_stocs_calls " << format_double(median(calls)) << '\n';
  }
  return o.str();
}

std::string format_timing(const std::vector<RunReport>& rows) {
  std::ostringstream o;
  for (const RunReport& r : rows) {
    o << r.command << ' ' << r.scenario;
    if (rows.size() > 1) o << " seed=" << r.seed;
    o << " wall_time_s " << format_double(r.wall_time_s) << '\n';
  }
  return o.str();
}

}  // namespace stocs
