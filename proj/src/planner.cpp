#include "stocs/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "stocs/kernels.hpp"

namespace stocs {

double se2_distance(const Pose2& a, const Pose2& b, double w1, double w2) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dth = wrap_angle(a.theta - b.theta);
  return std::sqrt(w1 * (dx * dx + dy * dy) + w2 * dth * dth);
}

Pose2 sample_configuration(const PlannerSettings& s, Rng& rng,
                           const std::vector<double>& stable_angles, const Pose2& q_goal,
                           const ProblemBounds& bounds, SampleBranch* branch_out) {
  const double r = rng.uniform();
  SampleBranch br;
  if (r < s.p1) {
    br = SampleBranch::Uniform;
  } else if (r < s.p1 + s.p2 && !stable_angles.empty()) {
    br = SampleBranch::StableAngle;
  } else if (r < s.p1 + s.p2) {
    br = SampleBranch::Uniform;  // no resting orientations to draw from
  } else {
    br = SampleBranch::Goal;
  }
  if (branch_out) *branch_out = br;
  if (br == SampleBranch::Goal) return q_goal;
  const double x = rng.uniform(bounds.ws_lo_x, bounds.ws_hi_x);
  const double y = rng.uniform(bounds.ws_lo_y, bounds.ws_hi_y);
  if (br == SampleBranch::StableAngle) {
    const int i = rng.uniform_int(static_cast<int>(stable_angles.size()));
    return Pose2(x, y, stable_angles[static_cast<size_t>(i)]);
  }
  return Pose2(x, y, rng.uniform(-3.141592653589793, 3.141592653589793));
}

bool transition_test(const Pose2& q_parent, const Pose2& q_ideal, const Pose2& q_goal,
                     TemperatureState& ts, const PlannerSettings& s, Rng& rng) {
  const auto fail = [&]() {
    ++ts.consecutive_fails;
    if (ts.consecutive_fails > s.n_fail_max) {
      ts.temp = std::min(ts.temp * s.temp_rate, 1e10);
      ts.consecutive_fails = 0;
    }
    return false;
  };
  const double c_ideal = se2_distance(q_ideal, q_goal, s.w1, s.w2);
  if (c_ideal > s.c_max) return fail();
  const double c_parent = se2_distance(q_parent, q_goal, s.w1, s.w2);
  const double dist = se2_distance(q_parent, q_ideal, s.w1, s.w2);
  const double dc = dist > 0.0 ? (c_ideal - c_parent) / dist : 0.0;
  if (dc <= 0.0) return true;
  const double k = 0.5 * (c_ideal + c_parent);
  const double p = std::exp(-dc / std::max(k * ts.temp, 1e-300));
  if (rng.uniform() < p) {
    ts.temp = std::max(ts.temp / s.temp_rate, 1e-10);
    ts.consecutive_fails = 0;
    return true;
  }
  return fail();
}

bool stability_test(const Scenario& scn, const Pose2& q) {
  const kernels::EnvData ed = kernels::EnvData::build(scn.environment);
  const kernels::PointsSoA bd = kernels::PointsSoA::build(scn.object.boundary_points);
  std::vector<double> gaps(static_cast<size_t>(bd.size()));
  kernels::scan_gaps(ed, bd, q, gaps.data());

  IndexSet Y;
  for (int i = 0; i < bd.size(); ++i) {
    if (gaps[static_cast<size_t>(i)] <= 1e-6)
      Y.add({i, scn.object.boundary_points[static_cast<size_t>(i)]});
  }
  if (Y.size() == 0) return false;

  const int T = 1;
  const double dt = 0.1;
  MpccProblem pb = assemble(scn, nullptr, q, q, Y, T, dt, MpccWeights{});
  for (int i = 0; i < 3; ++i) {
    pb.lb[pb.layout.qd(0) + i] = 0.0;  // zero-motion: only the forces are free
    pb.ub[pb.layout.qd(0) + i] = 0.0;
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(pb.n());
  for (int t = 0; t <= T; ++t) {
    x0[pb.layout.q(t)] = q.x;
    x0[pb.layout.q(t) + 1] = q.y;
    x0[pb.layout.q(t) + 2] = q.theta;
  }

  SolveSettings st;
  st.max_iters = 120;
  const SolveResult r = solve(pb, x0, st);
  if (r.status == SolveStatus::Infeasible || r.status == SolveStatus::Aborted) return false;

  MpccEval ev;
  pb.eval(r.x, ev, false);
  double bal = 0.0;
  const int rb0 = 3 + 3 * T;
  for (int i = 0; i < 3; ++i) bal += std::abs(ev.eq[rb0 + i]);
  double comp = 0.0;
  for (const auto& cp : pb.comp_pairs) comp += std::abs(ev.ineq[cp.first] * ev.ineq[cp.second]);
  const double min_ineq = ev.ineq.size() > 0 ? ev.ineq.minCoeff() : 0.0;
  return bal <= 1e-4 && comp <= 1e-4 * std::max(1, pb.ncc()) && min_ineq >= -1e-6;
}

bool StabilityCache::query(const Scenario& scn, const Pose2& q) {
  const auto quant = [](double v) { return static_cast<int64_t>(std::llround(v * 1e4)); };
  const uint64_t kx = static_cast<uint64_t>(quant(q.x)) & 0x1FFFFF;
  const uint64_t ky = static_cast<uint64_t>(quant(q.y)) & 0x1FFFFF;
  const uint64_t kt = static_cast<uint64_t>(quant(wrap_angle(q.theta))) & 0x3FFFFF;
  const uint64_t key = (kx << 43) | (ky << 22) | kt;
  const auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const bool stable = stability_test(scn, q);
  cache_.emplace(key, stable);
  return stable;
}

std::vector<int> admissible_modes(const Scenario& scn, const Pose2& q) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(scn.modes.size()); ++i) {
    const ManipulationMode& m = scn.modes[static_cast<size_t>(i)];
    if (m.kind == ModeKind::FixedPoints) {
      bool angle_ok = m.admissible_angles.empty();
      for (double a : m.admissible_angles)
        if (std::abs(wrap_angle(q.theta - a)) <= 1e-3) angle_ok = true;
      if (!angle_ok) continue;
      bool clear = true;
      for (const Vec2& p : m.points) {
        if (signed_distance(scn.environment, transform_point(q, p)).distance <= 1e-6) {
          clear = false;
          break;
        }
      }
      if (clear) out.push_back(i);
    } else {
      // the face interior must be reachable; its corners may rest in contact
      const Vec2 mid = 0.5 * (m.face_a + m.face_b);
      if (signed_distance(scn.environment, transform_point(q, mid)).distance > 1e-6)
        out.push_back(i);
    }
  }
  return out;
}

PlannerResult plan(const Scenario& scn, const Pose2& q_init, const Pose2& q_goal,
                   const PlannerSettings& settings) {
  const auto t_start = std::chrono::steady_clock::now();
  PlannerResult out;
  Rng rng(settings.rng_seed);
  StabilityCache stable_cache;
  TemperatureState ts;
  ts.temp = settings.temperature_init;

  std::vector<double> stable_angles;
  for (const StablePose& sp : stable_poses(scn.object, scn.environment))
    stable_angles.push_back(sp.theta);

  TreeNode root;
  root.id = 0;
  root.q = q_init;
  root.theta_unwrapped = q_init.theta;
  out.nodes.push_back(root);

  const int trip_cap = 50 * settings.max_extensions;
  int goal_node = -1;

  while (out.stocs_calls < settings.max_extensions && out.loop_trips < trip_cap) {
    ++out.loop_trips;
    if (settings.interrupt && settings.interrupt()) break;

    SampleBranch branch;
    const Pose2 q_rand =
        sample_configuration(settings, rng, stable_angles, q_goal, scn.bounds, &branch);

    int nearest = 0;
    double best_d = se2_distance(out.nodes[0].q, q_rand, 1.0, 1.0);
    for (int i = 1; i < static_cast<int>(out.nodes.size()); ++i) {
      const double d = se2_distance(out.nodes[static_cast<size_t>(i)].q, q_rand, 1.0, 1.0);
      if (d < best_d) {
        best_d = d;
        nearest = i;
      }
    }
    const TreeNode& parent = out.nodes[static_cast<size_t>(nearest)];

    if (!transition_test(parent.q, q_rand, q_goal, ts, settings, rng)) {
      ++out.transition_rejects;
      continue;
    }

    int mode_idx = -1;
    const bool parent_stable = stable_cache.query(scn, parent.q);
    if (parent_stable || parent.mode_index < 0) {
      const std::vector<int> adm = admissible_modes(scn, parent.q);
      if (adm.empty()) {
        ++out.mode_rejects;
        continue;
      }
      mode_idx = adm[static_cast<size_t>(rng.uniform_int(static_cast<int>(adm.size())))];
    } else {
      mode_idx = parent.mode_index;
    }
    const ManipulationMode* mode = &scn.modes[static_cast<size_t>(mode_idx)];

    StocsSettings st = settings.stocs;
    st.interrupt = settings.interrupt;
    st.weights.W = settings.W;
    if (branch == SampleBranch::StableAngle) {
      st.weights.w1 = 0.0;  // chase the orientation, let the position ride along
      st.weights.w2 = 1.0;
    } else {
      st.weights.w1 = settings.w1;
      st.weights.w2 = settings.w2;
    }

    ++out.stocs_calls;
    const StocsResult sr = run(scn, mode, parent.q, q_rand, st);
    if (sr.trajectory.empty()) continue;
    if (sr.status == StocsStatus::Infeasible || sr.status == StocsStatus::Aborted) continue;

    const Pose2 endpoint = sr.trajectory.back().q;
    if (se2_distance(parent.q, endpoint, 1.0, 1.0) <= 1e-4) continue;

    const VerifyReport vr =
        verify_trajectory(scn, mode, sr.trajectory, sr.index_set, st.dt, VerifyTolerances{});
    if (!vr.pass) continue;

    TreeNode node;
    node.id = static_cast<int>(out.nodes.size());
    node.q = endpoint;
    node.parent = nearest;
    node.mode_index = mode_idx;
    node.incoming = sr;
    node.theta_unwrapped =
        parent.theta_unwrapped + wrap_angle(endpoint.theta - parent.q.theta);
    out.nodes.push_back(std::move(node));

    if (se2_distance(endpoint, q_goal, 1.0, 1.0) <= settings.goal_tol) {
      goal_node = static_cast<int>(out.nodes.size()) - 1;
      break;
    }
  }

  if (goal_node >= 0) {
    out.found = true;
    for (int i = goal_node; i >= 0; i = out.nodes[static_cast<size_t>(i)].parent)
      out.path.push_back(i);
    std::reverse(out.path.begin(), out.path.end());
  }
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace stocs
