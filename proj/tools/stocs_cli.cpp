#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stocs/kernels.hpp"
#include "stocs/planner.hpp"
#include "stocs/report.hpp"
#include "stocs/scenario.hpp"
#include "stocs/stocs.hpp"
#include "stocs/svg.hpp"
#include "stocs/trajectory_io.hpp"
#include "stocs/verify.hpp"

namespace fs = std::filesystem;
using namespace stocs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInputError = 4;

long read_vm_hwm_kb() {
#ifdef __linux__
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      long kb = 0;
      std::sscanf(line.c_str(), "VmHWM: %ld", &kb);
      return kb;
    }
  }
#endif
  return 0;
}

// Shared wall-clock / peak-RSS guard handed to the solvers as an interrupt.
struct ResourceGuard {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double time_limit_s = 0.0;  // <= 0: unlimited
  long mem_limit_kb = 0;      // <= 0: unlimited
  bool tripped = false;

  bool operator()() {
    if (tripped) return true;
    if (time_limit_s > 0.0) {
      const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (el > time_limit_s) tripped = true;
    }
    if (!tripped && mem_limit_kb > 0 && read_vm_hwm_kb() > mem_limit_kb) tripped = true;
    return tripped;
  }
};

struct SolveOptions {
  std::string scenario_path;
  std::string mode_name;  // empty: first declared mode; "none": no manipulator
  std::string out_dir = ".";
  int T = 20;
  double dt = 0.1;
  int n_max = 100;
  double eps = 1e-4;
  double w1 = 1.0, w2 = 1.0, W = 5.0;
  double time_limit_s = 0.0;
  double mem_limit_mb = 0.0;
  uint64_t seed = 0;
  bool trace = false;
  std::string nlp_log_path;
};

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  std::string seeds_csv;  // overrides seed when given
  uint64_t seed = 0;
  int max_extensions = 500;
  double goal_tol = 0.02;
  double c_max = 2.0;
  double p1 = 0.5, p2 = 0.3;
  double temperature_init = 0.1;
  double temp_rate = 2.0;
  int n_fail_max = 5;
  int T = 5;
  double dt = 0.1;
  int n_max = 10;
  double w1 = 1.0, w2 = 1.0, W = 5.0;
  double time_limit_s = 0.0;
};

const ManipulationMode* resolve_mode(const Scenario& scn, const std::string& name) {
  if (name == "none") return nullptr;
  if (name.empty()) return scn.modes.empty() ? nullptr : &scn.modes.front();
  const ManipulationMode* m = scn.find_mode(name);
  if (!m) throw ScenarioError(0, "mode '" + name + "': not defined in the scenario");
  return m;
}

void warn_if_unstable_start(const Scenario& scn) {
  if (!stability_test(scn, scn.q_init))
    std::cerr << "warning: q_init is not statically stable in this environment\n";
}

int run_solver_command(const SolveOptions& opt, bool full_instantiation) {
  const Scenario scn = load_scenario(opt.scenario_path);
  const ManipulationMode* mode = resolve_mode(scn, opt.mode_name);
  warn_if_unstable_start(scn);
  fs::create_directories(opt.out_dir);

  ResourceGuard guard;
  guard.time_limit_s = opt.time_limit_s;
  guard.mem_limit_kb = static_cast<long>(opt.mem_limit_mb * 1024.0);

  StocsSettings st;
  st.T = opt.T;
  st.dt = opt.dt;
  st.n_max = opt.n_max;
  st.eps_x = st.eps_gap = st.eps_s = st.eps_p = opt.eps;
  st.weights = MpccWeights{opt.w1, opt.w2, opt.W};
  st.full_instantiation = full_instantiation;
  st.interrupt = [&guard]() { return guard(); };
  std::ofstream trace_file;
  if (opt.trace) {
    trace_file.open(fs::path(opt.out_dir) / "stocs_trace.csv");
    trace_file << "k,points,nlp_iters,nlp_status,alpha,merit,step_norm,comp_gap,balance_max,"
                  "penetration_max\n";
    st.trace = &trace_file;
  }
  std::ofstream nlp_log_file;
  if (!opt.nlp_log_path.empty()) {
    nlp_log_file.open(opt.nlp_log_path);
    nlp_log_file << "iter,L,f,viol,mu,rho,pg,alpha\n";
    st.nlp.iter_log = &nlp_log_file;
  }

  const StocsResult res = run(scn, mode, scn.q_init, scn.q_goal, st);

  write_trajectory_csv((fs::path(opt.out_dir) / "trajectory.csv").string(), scn, mode, res);
  write_text_file((fs::path(opt.out_dir) / "trajectory.svg").string(),
                  render_trajectory_svg(scn, res.trajectory, res.index_set));

  RunReport rep;
  rep.command = full_instantiation ? "vanilla" : "stocs";
  rep.scenario = scn.name;
  rep.mode = mode ? mode->name : "";
  rep.seed = opt.seed;
  rep.status = (res.status == StocsStatus::Aborted && guard.tripped)
                   ? "ResourceLimit"
                   : to_string(res.status);
  rep.outer_iters = res.stats.outer_iters;
  rep.avg_index_points = res.stats.avg_index_points;
  rep.nlp_iters_total = res.stats.nlp_iters_total;
  rep.goal_distance = res.trajectory.empty()
                          ? 0.0
                          : se2_distance(res.trajectory.back().q, scn.q_goal, 1.0, 1.0);
  rep.comp_gap_sum = res.residuals.comp_gap_sum;
  rep.balance_l1_max = res.residuals.balance_l1_max;
  rep.penetration_max = res.residuals.penetration_max;
  rep.wall_time_s = res.stats.wall_time_s;
  write_text_file((fs::path(opt.out_dir) / "report.txt").string(), format_report(rep));
  write_text_file((fs::path(opt.out_dir) / "timing.txt").string(), format_timing({rep}));
  std::cout << format_report(rep);

  switch (res.status) {
    case StocsStatus::Converged: return kExitOk;
    case StocsStatus::Infeasible: return kExitInfeasible;
    default: return kExitNotConverged;
  }
}

std::vector<uint64_t> parse_seeds(const PlanOptions& opt) {
  std::vector<uint64_t> seeds;
  if (opt.seeds_csv.empty()) {
    seeds.push_back(opt.seed);
    return seeds;
  }
  std::istringstream in(opt.seeds_csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw ScenarioError(0, "--seeds: no seeds given");
  return seeds;
}

int run_plan_command(const PlanOptions& opt) {
  const Scenario scn = load_scenario(opt.scenario_path);
  warn_if_unstable_start(scn);
  fs::create_directories(opt.out_dir);
  const std::vector<uint64_t> seeds = parse_seeds(opt);

  ResourceGuard guard;
  guard.time_limit_s = opt.time_limit_s;

  std::vector<RunReport> rows;
  int successes = 0;
  for (uint64_t seed : seeds) {
    PlannerSettings ps;
    ps.p1 = opt.p1;
    ps.p2 = opt.p2;
    ps.w1 = opt.w1;
    ps.w2 = opt.w2;
    ps.W = opt.W;
    ps.c_max = opt.c_max;
    ps.max_extensions = opt.max_extensions;
    ps.goal_tol = opt.goal_tol;
    ps.temperature_init = opt.temperature_init;
    ps.temp_rate = opt.temp_rate;
    ps.n_fail_max = opt.n_fail_max;
    ps.rng_seed = seed;
    ps.stocs.T = opt.T;
    ps.stocs.dt = opt.dt;
    ps.stocs.n_max = opt.n_max;
    ps.interrupt = [&guard]() { return guard(); };

    const PlannerResult pr = plan(scn, scn.q_init, scn.q_goal, ps);

    const fs::path seed_dir = fs::path(opt.out_dir) / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    write_text_file((seed_dir / "tree.svg").string(), render_tree_svg(scn, pr));
    if (pr.found) {
      int edge = 0;
      for (size_t i = 1; i < pr.path.size(); ++i) {
        const TreeNode& nd = pr.nodes[static_cast<size_t>(pr.path[i])];
        const ManipulationMode* m =
            nd.mode_index >= 0 ? &scn.modes[static_cast<size_t>(nd.mode_index)] : nullptr;
        char name[32];
        std::snprintf(name, sizeof(name), "path_edge_%02d.csv", edge++);
        write_trajectory_csv((seed_dir / name).string(), scn, m, nd.incoming);
      }
    }

    RunReport rep;
    rep.command = "plan";
    rep.scenario = scn.name;
    rep.seed = seed;
    rep.status = pr.found ? "Found" : (guard.tripped ? "ResourceLimit" : "NotFound");
    rep.tree_nodes = static_cast<int>(pr.nodes.size());
    rep.path_nodes = static_cast<int>(pr.path.size());
    rep.stocs_calls = pr.stocs_calls;
    rep.goal_distance =
        pr.found ? se2_distance(pr.nodes[static_cast<size_t>(pr.path.back())].q, scn.q_goal, 1.0, 1.0)
                 : se2_distance(scn.q_init, scn.q_goal, 1.0, 1.0);
    rep.wall_time_s = pr.wall_time_s;
    write_text_file((seed_dir / "report.txt").string(), format_report(rep));
    rows.push_back(rep);
    if (pr.found) ++successes;
  }

  write_text_file((fs::path(opt.out_dir) / "batch_report.txt").string(), format_batch_table(rows));
  write_text_file((fs::path(opt.out_dir) / "timing.txt").string(), format_timing(rows));
  std::cout << format_batch_table(rows);
  return successes > 0 ? kExitOk : kExitNotConverged;
}

int run_verify_command(const std::string& scenario_path, const std::string& traj_path,
                       const std::string& mode_override, bool with_steps) {
  const Scenario scn = load_scenario(scenario_path);
  const LoadedTrajectory lt = read_trajectory_csv(traj_path);
  const std::string mode_name = mode_override.empty() ? lt.mode_name : mode_override;
  const ManipulationMode* mode =
      mode_name.empty() || mode_name == "none" ? nullptr : scn.find_mode(mode_name);
  if (!mode && !(mode_name.empty() || mode_name == "none"))
    throw ScenarioError(0, "mode '" + mode_name + "': not defined in the scenario");
  const VerifyReport vr = verify_trajectory(scn, mode, lt.states, lt.index_set, lt.dt);
  std::cout << format_verify_report(vr);
  if (with_steps) std::cout << format_verify_steps(vr);
  return vr.pass ? kExitOk : kExitNotConverged;
}

int run_stable_poses_command(const std::string& scenario_path) {
  const Scenario scn = load_scenario(scenario_path);
  const std::vector<StablePose> poses = stable_poses(scn.object, scn.environment);
  std::cout << "stable_poses " << poses.size() << '\n';
  for (const StablePose& p : poses)
    std::cout << format_double(p.theta) << ' ' << format_double(p.height) << '\n';
  return kExitOk;
}

int run_report_command(const std::string& scenario_path, const std::string& traj_path) {
  const Scenario scn = load_scenario(scenario_path);
  const LoadedTrajectory lt = read_trajectory_csv(traj_path);
  const ManipulationMode* mode = lt.mode_name.empty() ? nullptr : scn.find_mode(lt.mode_name);
  const VerifyReport vr = verify_trajectory(scn, mode, lt.states, lt.index_set, lt.dt);
  RunReport rep;
  rep.command = "stocs";
  rep.scenario = lt.scenario_name;
  rep.mode = lt.mode_name;
  rep.status = to_string(lt.status);
  rep.goal_distance =
      lt.states.empty() ? 0.0 : se2_distance(lt.states.back().q, scn.q_goal, 1.0, 1.0);
  rep.comp_gap_sum = vr.comp_gap_sum;
  rep.balance_l1_max = vr.max_balance_l1;
  rep.penetration_max = vr.max_penetration;
  std::cout << format_report(rep);
  std::cout << format_verify_report(vr);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar contact-rich manipulation planning toolkit"};
  app.require_subcommand(1);

  std::string kernel = "auto";
  app.add_option("--kernel", kernel, "Gap-scan kernel: auto, scalar, avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  SolveOptions so;
  PlanOptions po;
  std::string verify_scn, verify_traj, verify_mode;
  bool verify_steps = false;
  std::string report_scn, report_traj;
  std::string stable_scn;

  const auto add_solver_flags = [&](CLI::App* c) {
    c->add_option("--scenario", so.scenario_path, "Scenario file")->required();
    c->add_option("--mode", so.mode_name, "Manipulation mode name ('none' for no manipulator; default: first declared)");
    c->add_option("--out", so.out_dir, "Output directory")->capture_default_str();
    c->add_option("-T,--horizon", so.T, "Trajectory steps")->capture_default_str();
    c->add_option("--dt", so.dt, "Step duration, seconds")->capture_default_str();
    c->add_option("--n-max", so.n_max, "Outer iteration cap")->capture_default_str();
    c->add_option("--eps", so.eps, "Convergence tolerance (step, gap, balance, penetration)")
        ->capture_default_str();
    c->add_option("--w1", so.w1, "Position goal weight")->capture_default_str();
    c->add_option("--w2", so.w2, "Orientation goal weight")->capture_default_str();
    c->add_option("-W,--goal-weight", so.W, "Overall goal weight")->capture_default_str();
    c->add_option("--seed", so.seed, "Recorded in the report (the solver is deterministic)")
        ->capture_default_str();
    c->add_option("--time-limit", so.time_limit_s, "Wall-clock limit, seconds (0: none)")
        ->capture_default_str();
    c->add_option("--mem-limit", so.mem_limit_mb, "Peak-RSS limit, MB (0: none)")
        ->capture_default_str();
    c->add_flag("--trace", so.trace, "Write per-iteration stocs_trace.csv");
    c->add_option("--nlp-log", so.nlp_log_path, "Inner-solver iteration log file")->group("");
  };

  CLI::App* c_stocs = app.add_subcommand("stocs", "Solve one trajectory with the exchange method");
  add_solver_flags(c_stocs);
  CLI::App* c_vanilla =
      app.add_subcommand("vanilla", "Solve with every boundary point instantiated up front");
  add_solver_flags(c_vanilla);

  CLI::App* c_plan = app.add_subcommand("plan", "Multi-modal tree search over manipulation modes");
  c_plan->add_option("--scenario", po.scenario_path, "Scenario file")->required();
  c_plan->add_option("--out", po.out_dir, "Output directory")->capture_default_str();
  c_plan->add_option("--seed", po.seed, "Planner RNG seed")->capture_default_str();
  c_plan->add_option("--seeds", po.seeds_csv, "Comma-separated seed batch (overrides --seed)");
  c_plan->add_option("--max-extensions", po.max_extensions, "Steering-call budget")
      ->capture_default_str();
  c_plan->add_option("--goal-tol", po.goal_tol, "Goal distance tolerance")->capture_default_str();
  c_plan->add_option("--c-max", po.c_max, "Transition-test cost ceiling")->capture_default_str();
  c_plan->add_option("--p1", po.p1, "Uniform sample probability")->capture_default_str();
  c_plan->add_option("--p2", po.p2, "Stable-angle sample probability")->capture_default_str();
  c_plan->add_option("--temp-init", po.temperature_init, "Transition-test temperature")
      ->capture_default_str();
  c_plan->add_option("--temp-rate", po.temp_rate, "Temperature growth/decay factor")
      ->capture_default_str();
  c_plan->add_option("--n-fail-max", po.n_fail_max, "Rejections before the temperature rises")
      ->capture_default_str();
  c_plan->add_option("-T,--horizon", po.T, "Steering horizon")->capture_default_str();
  c_plan->add_option("--dt", po.dt, "Steering step duration")->capture_default_str();
  c_plan->add_option("--n-max", po.n_max, "Steering outer iteration cap")->capture_default_str();
  c_plan->add_option("--w1", po.w1, "Position cost weight")->capture_default_str();
  c_plan->add_option("--w2", po.w2, "Orientation cost weight")->capture_default_str();
  c_plan->add_option("-W,--goal-weight", po.W, "Steering goal weight")->capture_default_str();
  c_plan->add_option("--time-limit", po.time_limit_s, "Wall-clock limit, seconds (0: none)")
      ->capture_default_str();

  CLI::App* c_verify = app.add_subcommand("verify", "Recheck a trajectory file independently");
  c_verify->add_option("--scenario", verify_scn, "Scenario file")->required();
  c_verify->add_option("--trajectory", verify_traj, "Trajectory CSV")->required();
  c_verify->add_option("--mode", verify_mode, "Override the mode recorded in the file");
  c_verify->add_flag("--steps", verify_steps, "Also print a per-step residual table");

  CLI::App* c_stable = app.add_subcommand("stable-poses", "List flat-ground resting orientations");
  c_stable->add_option("--scenario", stable_scn, "Scenario file")->required();

  CLI::App* c_report = app.add_subcommand("report", "Summarize a trajectory file");
  c_report->add_option("--scenario", report_scn, "Scenario file")->required();
  c_report->add_option("--trajectory", report_traj, "Trajectory CSV")->required();

  CLI11_PARSE(app, argc, argv);

  if (kernel == "scalar") {
    kernels::select(kernels::Kind::Scalar);
  } else if (kernel == "avx2") {
    if (!kernels::avx2_available()) {
      std::cerr << "error: avx2 kernel requested but unavailable on this build/CPU\n";
      return kExitInputError;
    }
    kernels::select(kernels::Kind::Avx2);
  } else {
    kernels::select(kernels::Kind::Auto);
  }

  try {
    if (app.got_subcommand(c_stocs)) return run_solver_command(so, false);
    if (app.got_subcommand(c_vanilla)) return run_solver_command(so, true);
    if (app.got_subcommand(c_plan)) return run_plan_command(po);
    if (app.got_subcommand(c_verify)) return run_verify_command(verify_scn, verify_traj, verify_mode, verify_steps);
    if (app.got_subcommand(c_stable)) return run_stable_poses_command(stable_scn);
    if (app.got_subcommand(c_report)) return run_report_command(report_scn, report_traj);
  } catch (const ScenarioError& e) {
    if (e.line > 0)
      std::cerr << "error: line " << e.line << ": " << e.what() << '\n';
    else
      std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitInputError;
}
