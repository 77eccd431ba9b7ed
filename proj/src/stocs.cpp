#include "stocs/stocs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace stocs {

const char* to_string(StocsStatus s) {
  switch (s) {
    case StocsStatus::Converged: return "Converged";
    case StocsStatus::Infeasible: return "Infeasible";
    case StocsStatus::NotConverged: return "NotConverged";
    case StocsStatus::Aborted: return "Aborted";
  }
  return "Unknown";
}

namespace {

// Re-integrate the pose chain from the first knot so the Euler rows hold
// exactly. Every stored iterate goes through this, which keeps the dynamics
// defect at rounding level no matter what the inner solver did to the poses.
void polish_dynamics(const MpccLayout& L, const Pose2& q_start, double dt, Eigen::VectorXd& x) {
  x[L.q(0)] = q_start.x;
  x[L.q(0) + 1] = q_start.y;
  x[L.q(0) + 2] = q_start.theta;
  for (int t = 0; t < L.T; ++t) {
    for (int i = 0; i < 3; ++i) x[L.q(t + 1) + i] = x[L.q(t) + i] + dt * x[L.qd(t) + i];
  }
}

// Shift penetrating poses up by their deepest gap and re-derive the vertical
// velocities so the poses remain an exact integration. The shift is exact for
// level ground; the second sweep covers slanted edges where it underestimates.
void lift_nonpenetration(const MpccLayout& L, const kernels::EnvData& ed,
                         const kernels::PointsSoA& bd, double dt, Eigen::VectorXd& x) {
  for (int sweep = 0; sweep < 2; ++sweep) {
    bool moved = false;
    for (int t = 1; t <= L.T; ++t) {
      const int qi = L.q(t);
      const Pose2 q(x[qi], x[qi + 1], x[qi + 2]);
      const kernels::ScanResult s = kernels::scan_gaps(ed, bd, q);
      if (s.min_gap < 0.0) {
        x[qi + 1] -= s.min_gap;
        moved = true;
      }
    }
    if (!moved) break;
  }
  for (int t = 0; t < L.T; ++t) x[L.qd(t) + 1] = (x[L.q(t + 1) + 1] - x[L.q(t) + 1]) / dt;
}

// Copy a trajectory vector into a layout with more contact points; new force
// blocks start at zero. Old points keep their slots (the index set only grows).
Eigen::VectorXd migrate(const Eigen::VectorXd& x, const MpccLayout& from, const MpccLayout& to) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(to.n());
  for (int t = 0; t < from.T; ++t) {
    for (int i = 0; i < 3; ++i) y[to.q(t) + i] = x[from.q(t) + i];
    for (int i = 0; i < 3; ++i) y[to.qd(t) + i] = x[from.qd(t) + i];
    for (int i = 0; i < from.nu; ++i) y[to.u(t) + i] = x[from.u(t) + i];
    for (int j = 0; j < from.P; ++j)
      for (int c = 0; c < 4; ++c) y[to.z(t, j) + c] = x[from.z(t, j) + c];
  }
  for (int i = 0; i < 3; ++i) y[to.q(to.T) + i] = x[from.q(from.T) + i];
  return y;
}

std::vector<Pose2> extract_poses(const MpccLayout& L, const Eigen::VectorXd& x) {
  std::vector<Pose2> poses;
  poses.reserve(static_cast<size_t>(L.T) + 1);
  for (int t = 0; t <= L.T; ++t)
    poses.emplace_back(x[L.q(t)], x[L.q(t) + 1], x[L.q(t) + 2]);
  return poses;
}

struct ResidualReport {
  StocsResiduals r;
  int ncc = 0;
};

ResidualReport compute_residuals(const MpccProblem& pb, const kernels::EnvData& ed,
                                 const kernels::PointsSoA& bd, const Eigen::VectorXd& x) {
  ResidualReport out;
  out.ncc = pb.ncc();
  MpccEval ev;
  pb.eval(x, ev, false);
  for (const auto& cp : pb.comp_pairs)
    out.r.comp_gap_sum += std::abs(ev.ineq[cp.first] * ev.ineq[cp.second]);
  const int rb0 = 3 + 3 * pb.layout.T;
  for (int t = 0; t < pb.layout.T; ++t) {
    double l1 = 0.0;
    for (int i = 0; i < 3; ++i) l1 += std::abs(ev.eq[rb0 + 3 * t + i]) / kWrenchRowScale;
    out.r.balance_l1_total += l1;
    out.r.balance_l1_max = std::max(out.r.balance_l1_max, l1);
  }
  for (int t = 0; t <= pb.layout.T; ++t) {
    const Pose2 q(x[pb.layout.q(t)], x[pb.layout.q(t) + 1], x[pb.layout.q(t) + 2]);
    const kernels::ScanResult s = kernels::scan_gaps(ed, bd, q);
    const double pen = std::max(0.0, -s.min_gap);
    out.r.penetration_total += pen;
    out.r.penetration_max = std::max(out.r.penetration_max, pen);
  }
  return out;
}

}  // namespace

Eigen::VectorXd initialize_trajectory(const Pose2& q_start, const Pose2& q_goal,
                                      const ManipulationMode* mode, int T, double dt) {
  MpccLayout L;
  L.T = T;
  L.nu = mode ? mode->nu() : 0;
  L.P = 0;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.n());

  const double th0 = q_start.theta;
  const double th1 = th0 + wrap_angle(q_goal.theta - q_start.theta);
  std::vector<double> px(static_cast<size_t>(T) + 1), py(px.size()), pth(px.size());
  for (int t = 0; t <= T; ++t) {
    const double a = T > 0 ? static_cast<double>(t) / T : 1.0;
    px[static_cast<size_t>(t)] = q_start.x + a * (q_goal.x - q_start.x);
    py[static_cast<size_t>(t)] = q_start.y + a * (q_goal.y - q_start.y);
    pth[static_cast<size_t>(t)] = th0 + a * (th1 - th0);
  }
  for (int t = 0; t < T; ++t) {
    x[L.qd(t)] = (px[static_cast<size_t>(t) + 1] - px[static_cast<size_t>(t)]) / dt;
    x[L.qd(t) + 1] = (py[static_cast<size_t>(t) + 1] - py[static_cast<size_t>(t)]) / dt;
    x[L.qd(t) + 2] = (pth[static_cast<size_t>(t) + 1] - pth[static_cast<size_t>(t)]) / dt;
    if (mode && mode->kind == ModeKind::OnePointSlide) x[L.u(t)] = 0.5;
  }
  polish_dynamics(L, q_start, dt, x);
  return x;
}

std::vector<IndexPoint> max_violation_oracle(const ObjectModel& obj,
                                             const kernels::EnvData& env_data,
                                             const kernels::PointsSoA& boundary,
                                             const std::vector<Pose2>& poses,
                                             const IndexSet& existing) {
  constexpr double kGapTieTol = 1e-4;
  // Growing the set slowly keeps the subproblems small: a pose that is only
  // approximately resting keeps shifting its near-tie patch as it gets
  // polished, and instantiating every intermediate patch end bloats the
  // average point count without adding support the final pose needs.
  constexpr size_t kMaxNewPerIter = 2;
  std::vector<IndexPoint> added;
  IndexSet scratch = existing;
  const int n = boundary.size();
  std::vector<double> gaps(static_cast<size_t>(n));
  std::vector<int> tie;
  for (const Pose2& q : poses) {
    const kernels::ScanResult s = kernels::scan_gaps(env_data, boundary, q, gaps.data());
    if (s.argmin < 0) continue;
    tie.clear();
    for (int i = 0; i < n; ++i)
      if (gaps[static_cast<size_t>(i)] <= s.min_gap + kGapTieTol) tie.push_back(i);
    // A near-tie spread over a patch of boundary means face contact. The
    // argmin alone always lands on the same end of the patch, which can leave
    // the far end unsupported at every iteration, so take both extremes.
    int ca = s.argmin;
    int cb = -1;
    if (tie.size() > 1) {
      double best = 0.0;
      for (size_t a = 0; a + 1 < tie.size(); ++a)
        for (size_t b = a + 1; b < tie.size(); ++b) {
          const size_t ia = static_cast<size_t>(tie[a]);
          const size_t ib = static_cast<size_t>(tie[b]);
          const double dx = boundary.x[ia] - boundary.x[ib];
          const double dy = boundary.y[ia] - boundary.y[ib];
          const double d2 = dx * dx + dy * dy;
          if (d2 > best) {
            best = d2;
            ca = tie[a];
            cb = tie[b];
          }
        }
      if (best <= 1e-6 * 1e-6) {
        ca = s.argmin;
        cb = -1;
      }
    }
    for (const int id : {ca, cb}) {
      if (id < 0) continue;
      IndexPoint p;
      p.id = id;
      p.local = obj.boundary_points[static_cast<size_t>(id)];
      if (scratch.add(p)) added.push_back(p);
      if (added.size() >= kMaxNewPerIter) return added;
    }
  }
  return added;
}

double merit(const MpccProblem& problem, const kernels::EnvData& env_data,
             const kernels::PointsSoA& boundary, const Eigen::VectorXd& x, double mu) {
  MpccEval ev;
  problem.eval(x, ev, false);
  double viol = ev.eq.cwiseAbs().sum();
  for (int i = 0; i < problem.nineq; ++i) viol += std::max(0.0, -ev.ineq[i]);
  for (const auto& cp : problem.comp_pairs)
    viol += std::abs(ev.ineq[cp.first] * ev.ineq[cp.second]);
  for (int t = 0; t <= problem.layout.T; ++t) {
    const int qi = problem.layout.q(t);
    const Pose2 q(x[qi], x[qi + 1], x[qi + 2]);
    const kernels::ScanResult s = kernels::scan_gaps(env_data, boundary, q);
    viol += std::max(0.0, -s.min_gap);
  }
  return ev.f + mu * viol;
}

StocsResult run(const Scenario& scn, const ManipulationMode* mode, const Pose2& q_start,
                const Pose2& q_goal, const StocsSettings& st) {
  const auto t_start = std::chrono::steady_clock::now();
  StocsResult out;
  out.dt = st.dt;

  const kernels::EnvData ed = kernels::EnvData::build(scn.environment);
  const kernels::PointsSoA bd = kernels::PointsSoA::build(scn.object.boundary_points);

  IndexSet Y;
  if (st.full_instantiation) {
    for (int i = 0; i < static_cast<int>(scn.object.boundary_points.size()); ++i)
      Y.add({i, scn.object.boundary_points[static_cast<size_t>(i)]}, 0.0);
  }

  MpccLayout layout;
  layout.T = st.T;
  layout.nu = mode ? mode->nu() : 0;
  layout.P = 0;
  Eigen::VectorXd x = initialize_trajectory(q_start, q_goal, mode, st.T, st.dt);
  lift_nonpenetration(layout, ed, bd, st.dt, x);

  long long sum_points = 0;
  int k_done = 0;
  int null_steps = 0;
  double last_step_norm = 0.0;
  MpccProblem pb;

  // Dual estimates persist across outer iterations so each subproblem call
  // resumes near the constraint manifold instead of re-learning the forces'
  // multipliers from zero (which costs a feasibility excursion the outer
  // merit check then rejects). Rows of carried-over points keep their
  // multipliers; rows of newly instantiated points start at zero.
  Multipliers duals;
  const auto remap_duals = [&](int P_old, int P_new) {
    if (duals.lambda.size() == 0 || P_old == P_new) return;
    const int T = st.T;
    const int tail = static_cast<int>(duals.nu.size()) - 8 * T * P_old - P_old;
    Multipliers nd;
    nd.lambda = duals.lambda;
    nd.nu = Eigen::VectorXd::Zero(8 * T * P_new + P_new + tail);
    nd.nuc = Eigen::VectorXd::Zero(6 * T * P_new);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < P_old; ++j) {
        for (int r = 0; r < 8; ++r)
          nd.nu[8 * (t * P_new + j) + r] = duals.nu[8 * (t * P_old + j) + r];
        for (int c = 0; c < 6; ++c)
          nd.nuc[6 * (t * P_new + j) + c] = duals.nuc[6 * (t * P_old + j) + c];
      }
    for (int j = 0; j < P_old; ++j) nd.nu[8 * T * P_new + j] = duals.nu[8 * T * P_old + j];
    for (int r = 0; r < tail; ++r)
      nd.nu[8 * T * P_new + P_new + r] = duals.nu[8 * T * P_old + P_old + r];
    duals = std::move(nd);
  };

  for (int k = 1; k <= st.n_max; ++k) {
    if (st.interrupt && st.interrupt()) {
      out.status = StocsStatus::Aborted;
      break;
    }

    bool grew = false;
    if (!st.full_instantiation) {
      const std::vector<Pose2> poses = extract_poses(layout, x);
      const std::vector<IndexPoint> added = max_violation_oracle(scn.object, ed, bd, poses, Y);
      for (const IndexPoint& p : added) grew |= Y.add(p);
    }

    pb = assemble(scn, mode, q_start, q_goal, Y, st.T, st.dt, st.weights);
    if (pb.layout.P != layout.P) {
      x = migrate(x, layout, pb.layout);
      remap_duals(layout.P, pb.layout.P);
      layout = pb.layout;
    }

    SolveSettings nlp = st.nlp;
    nlp.max_iters = st.schedule(k);
    nlp.comp_relaxation_init =
        std::max(st.nlp.comp_relaxation_init *
                     std::pow(st.nlp.comp_relaxation_shrink, static_cast<double>(k - 1)),
                 1e-7);
    nlp.interrupt = st.interrupt;
    nlp.warm = &duals;

    const Eigen::VectorXd x_pre = x;
    const SolveResult sr = solve(pb, x_pre, nlp);
    out.stats.nlp_iters_total += sr.stats.iterations;
    sum_points += Y.size();
    k_done = k;

    if (sr.status == SolveStatus::Aborted) {
      out.status = StocsStatus::Aborted;
      break;
    }
    if (sr.status == SolveStatus::Infeasible) {
      out.status = StocsStatus::Infeasible;
      x = sr.x;
      polish_dynamics(layout, q_start, st.dt, x);
      lift_nonpenetration(layout, ed, bd, st.dt, x);
      break;
    }

    // merit line search along the solver step, every candidate re-integrated
    const Eigen::VectorXd dx = sr.x - x_pre;
    const double m0 = merit(pb, ed, bd, x_pre, st.merit_mu);
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    for (int ls = 0; ls < st.n_ls_max; ++ls) {
      Eigen::VectorXd xt = x_pre + alpha * dx;
      polish_dynamics(layout, q_start, st.dt, xt);
      lift_nonpenetration(layout, ed, bd, st.dt, xt);
      const double mt = merit(pb, ed, bd, xt, st.merit_mu);
      if (std::isfinite(mt) && mt <= m0 - 1e-12 * std::max(1.0, std::abs(m0))) {
        accepted = true;
        x_new = xt;
        break;
      }
      alpha *= st.ls_shrink;
    }
    if (accepted) {
      x = x_new;
      last_step_norm = alpha * dx.norm();
      null_steps = 0;
    } else {
      last_step_norm = 0.0;
      ++null_steps;
    }

    const ResidualReport rr = compute_residuals(pb, ed, bd, x);
    out.residuals = rr.r;
    out.residuals.step_norm = last_step_norm;

    if (st.trace) {
      (*st.trace) << k << ',' << Y.size() << ',' << sr.stats.iterations << ','
                  << to_string(sr.status) << ',' << (accepted ? alpha : 0.0) << ','
                  << merit(pb, ed, bd, x, st.merit_mu) << ',' << last_step_norm << ','
                  << rr.r.comp_gap_sum << ',' << rr.r.balance_l1_max << ','
                  << rr.r.penetration_max << '\n';
    }

    const int n = pb.n();
    const bool step_small = last_step_norm <= st.eps_x * n;
    const bool comp_ok = rr.r.comp_gap_sum <= st.eps_gap * std::max(1, rr.ncc);
    const bool bal_ok = rr.r.balance_l1_max <= st.eps_s * st.T;
    const bool pen_ok = rr.r.penetration_total <= st.eps_p * st.T;
    if (step_small && comp_ok && bal_ok && pen_ok) {
      out.status = StocsStatus::Converged;
      break;
    }
    if (null_steps >= 3 && !grew) {
      out.status = StocsStatus::NotConverged;
      break;
    }
  }

  out.index_set = Y;
  out.stats.outer_iters = k_done;
  out.stats.avg_index_points =
      k_done > 0 ? static_cast<double>(sum_points) / k_done : static_cast<double>(Y.size());

  // final residual pass on the returned iterate
  if (k_done > 0) {
    const ResidualReport rr = compute_residuals(pb, ed, bd, x);
    const double step = out.residuals.step_norm;
    out.residuals = rr.r;
    out.residuals.step_norm = step;
  }

  // unpack the trajectory
  out.trajectory.clear();
  out.trajectory.reserve(static_cast<size_t>(layout.T) + 1);
  for (int t = 0; t <= layout.T; ++t) {
    TrajectoryState s;
    const int qi = layout.q(t);
    s.q = Pose2(x[qi], x[qi + 1], x[qi + 2]);
    s.theta_unwrapped = x[qi + 2];
    if (t < layout.T) {
      s.qdot = Twist2{x[layout.qd(t)], x[layout.qd(t) + 1], x[layout.qd(t) + 2]};
      s.u = Eigen::VectorXd::Zero(layout.nu);
      for (int i = 0; i < layout.nu; ++i) s.u[i] = x[layout.u(t) + i];
      s.forces.resize(static_cast<size_t>(layout.P));
      s.slack.resize(static_cast<size_t>(layout.P));
      for (int j = 0; j < layout.P; ++j) {
        const int zi = layout.z(t, j);
        s.forces[static_cast<size_t>(j)] = ContactForce{x[zi], x[zi + 1], x[zi + 2]};
        s.slack[static_cast<size_t>(j)] = x[zi + 3];
      }
    } else {
      s.u = Eigen::VectorXd::Zero(layout.nu);
    }
    out.trajectory.push_back(s);
  }

  out.stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace stocs
