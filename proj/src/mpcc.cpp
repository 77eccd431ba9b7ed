#include "stocs/mpcc.hpp"

#include <cmath>
#include <vector>

namespace stocs {

bool IndexSet::contains(const Vec2& local, double tol) const {
  for (const IndexPoint& p : points) {
    if ((p.local - local).norm() <= tol) return true;
  }
  return false;
}

bool IndexSet::add(const IndexPoint& p, double tol) {
  if (contains(p.local, tol)) return false;
  points.push_back(p);
  return true;
}

int expected_neq(int T) { return 3 + 6 * T; }

int expected_nineq(int T, int P, const ManipulationMode* mode) {
  int n = 8 * P * T + P;
  if (mode) {
    n += 2 * mode->contact_count() * T;
    if (mode->kind == ModeKind::OnePointSlide && T >= 2) n += 2 * (T - 1);
  }
  return n;
}

int expected_ncc(int T, int P) { return 6 * T * P; }

MpccProblem assemble(const Scenario& scn, const ManipulationMode* mode, const Pose2& q_start,
                     const Pose2& q_goal, const IndexSet& index_set, int T, double dt,
                     const MpccWeights& weights) {
  MpccProblem p;
  p.layout.T = T;
  p.layout.nu = mode ? mode->nu() : 0;
  p.layout.P = index_set.size();
  p.dt = dt;
  p.obj = &scn.object;
  p.env = &scn.environment;
  p.mode = mode;
  p.gravity = scn.gravity;
  p.q_start = q_start;
  p.index_set = index_set;
  p.weights = weights;
  p.goal_x = q_goal.x;
  p.goal_y = q_goal.y;
  // Track the goal angle on the branch of the start angle so the quadratic
  // angle cost pulls along the short way around.
  p.goal_theta = q_start.theta + wrap_angle(q_goal.theta - q_start.theta);
  p.slide_rate = scn.bounds.slide_rate;

  const int n = p.n();
  const int P = p.layout.P;
  const int nu = p.layout.nu;
  const double kBig = 1e9;
  p.lb = Eigen::VectorXd::Constant(n, -kBig);
  p.ub = Eigen::VectorXd::Constant(n, kBig);
  const ProblemBounds& b = scn.bounds;
  // A hair of slack on the workspace box: poses are re-integrated from the
  // velocities after every step, which can drift off a tight bound by rounding.
  const double margin = 1e-6;
  for (int t = 0; t <= T; ++t) {
    const int qi = p.layout.q(t);
    p.lb[qi] = b.ws_lo_x - margin;
    p.ub[qi] = b.ws_hi_x + margin;
    p.lb[qi + 1] = b.ws_lo_y - margin;
    p.ub[qi + 1] = b.ws_hi_y + margin;
    // theta stays unbounded: it is unwrapped over the horizon
  }
  for (int t = 0; t < T; ++t) {
    const int di = p.layout.qd(t);
    p.lb[di] = -b.vel_lin;
    p.ub[di] = b.vel_lin;
    p.lb[di + 1] = -b.vel_lin;
    p.ub[di + 1] = b.vel_lin;
    p.lb[di + 2] = -b.vel_ang;
    p.ub[di + 2] = b.vel_ang;
    if (mode) {
      const int ui = p.layout.u(t);
      if (mode->kind == ModeKind::OnePointSlide) {
        p.lb[ui] = 0.0;
        p.ub[ui] = 1.0;
        p.lb[ui + 1] = 0.0;
        p.ub[ui + 1] = b.force_max;
        p.lb[ui + 2] = -b.force_max;
        p.ub[ui + 2] = b.force_max;
      } else {
        for (int i = 0; i < mode->contact_count(); ++i) {
          p.lb[ui + 2 * i] = 0.0;
          p.ub[ui + 2 * i] = b.force_max;
          p.lb[ui + 2 * i + 1] = -b.force_max;
          p.ub[ui + 2 * i + 1] = b.force_max;
        }
      }
    }
    for (int j = 0; j < P; ++j) {
      const int zi = p.layout.z(t, j);
      for (int c = 0; c < 4; ++c) {
        p.lb[zi + c] = 0.0;
        p.ub[zi + c] = b.force_max;
      }
    }
  }

  p.neq = expected_neq(T);
  p.nineq = expected_nineq(T, P, mode);
  p.comp_pairs.clear();
  p.comp_pairs.reserve(static_cast<size_t>(expected_ncc(T, P)));
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < P; ++j) {
      const int base = 8 * (t * P + j);
      p.comp_pairs.push_back({base + 4, base + 0});  // zn . gap
      p.comp_pairs.push_back({base + 5, base + 0});  // zp . gap
      p.comp_pairs.push_back({base + 6, base + 0});  // zm . gap
      p.comp_pairs.push_back({base + 5, base + 2});  // zp . (gamma + v)
      p.comp_pairs.push_back({base + 6, base + 3});  // zm . (gamma - v)
      p.comp_pairs.push_back({base + 7, base + 1});  // gamma . cone slack
    }
  }

  p.obj_hess_diag = Eigen::VectorXd::Zero(n);
  for (int t = 1; t <= T; ++t) {
    const int qi = p.layout.q(t);
    p.obj_hess_diag[qi] = 2.0 * weights.W * weights.w1;
    p.obj_hess_diag[qi + 1] = 2.0 * weights.W * weights.w1;
    p.obj_hess_diag[qi + 2] = 2.0 * weights.W * weights.w2;
  }
  for (int t = 0; t < T; ++t) {
    const int di = p.layout.qd(t);
    for (int c = 0; c < 3 + nu + 4 * P; ++c) p.obj_hess_diag[di + c] = 2.0 * p.regularization;
  }
  return p;
}

double MpccProblem::objective(const Eigen::VectorXd& x) const {
  const int T = layout.T;
  double f = 0.0;
  for (int t = 1; t <= T; ++t) {
    const int qi = layout.q(t);
    const double dx = x[qi] - goal_x;
    const double dy = x[qi + 1] - goal_y;
    const double dth = x[qi + 2] - goal_theta;
    f += weights.W * (weights.w1 * (dx * dx + dy * dy) + weights.w2 * dth * dth);
  }
  for (int t = 0; t < T; ++t) {
    const int di = layout.qd(t);
    for (int c = 0; c < 3 + layout.nu + 4 * layout.P; ++c) {
      const double v = x[di + c];
      f += regularization * v * v;
    }
  }
  return f;
}

void MpccProblem::eval(const Eigen::VectorXd& x, MpccEval& out, bool with_jacobians) const {
  const int T = layout.T;
  const int P = layout.P;
  const int nu = layout.nu;
  const int N = n();
  const int nc = mode ? mode->contact_count() : 0;

  out.f = 0.0;
  out.grad = Eigen::VectorXd::Zero(N);
  out.eq = Eigen::VectorXd::Zero(neq);
  out.ineq = Eigen::VectorXd::Zero(nineq);

  // objective and gradient
  for (int t = 1; t <= T; ++t) {
    const int qi = layout.q(t);
    const double dx = x[qi] - goal_x;
    const double dy = x[qi + 1] - goal_y;
    const double dth = x[qi + 2] - goal_theta;
    out.f += weights.W * (weights.w1 * (dx * dx + dy * dy) + weights.w2 * dth * dth);
    out.grad[qi] += 2.0 * weights.W * weights.w1 * dx;
    out.grad[qi + 1] += 2.0 * weights.W * weights.w1 * dy;
    out.grad[qi + 2] += 2.0 * weights.W * weights.w2 * dth;
  }
  for (int t = 0; t < T; ++t) {
    const int di = layout.qd(t);
    for (int c = 0; c < 3 + nu + 4 * P; ++c) {
      const double v = x[di + c];
      out.f += regularization * v * v;
      out.grad[di + c] += 2.0 * regularization * v;
    }
  }

  std::vector<Eigen::Triplet<double>> te;
  std::vector<Eigen::Triplet<double>> ti;
  if (with_jacobians) {
    te.reserve(static_cast<size_t>(neq) * 8);
    ti.reserve(static_cast<size_t>(nineq) * 4);
  }
  auto add_e = [&](int r, int c, double v) {
    if (with_jacobians) te.emplace_back(r, c, v);
  };
  auto add_i = [&](int r, int c, double v) {
    if (with_jacobians) ti.emplace_back(r, c, v);
  };

  // rows 0..2: pin the first pose
  {
    const int q0 = layout.q(0);
    out.eq[0] = x[q0] - q_start.x;
    out.eq[1] = x[q0 + 1] - q_start.y;
    out.eq[2] = x[q0 + 2] - q_start.theta;
    add_e(0, q0, 1.0);
    add_e(1, q0 + 1, 1.0);
    add_e(2, q0 + 2, 1.0);
  }
  // rows 3..3+3T-1: forward Euler pose update
  for (int t = 0; t < T; ++t) {
    const int r = 3 + 3 * t;
    const int qa = layout.q(t);
    const int da = layout.qd(t);
    const int qb = layout.q(t + 1);
    for (int i = 0; i < 3; ++i) {
      out.eq[r + i] = x[qa + i] + dt * x[da + i] - x[qb + i];
      add_e(r + i, qa + i, 1.0);
      add_e(r + i, da + i, dt);
      add_e(r + i, qb + i, -1.0);
    }
  }

  const int rb0 = 3 + 3 * T;          // first balance row
  const int rm0 = 8 * T * P + P;      // first manipulator cone row
  const int rs0 = rm0 + 2 * nc * T;   // first slide-rate row
  const double mu_env = obj->mu_env;
  const double mu_mnp = obj->mu_mnp;

  for (int t = 0; t < T; ++t) {
    const int qi = layout.q(t);
    const int di = layout.qd(t);
    const int ui = layout.u(t);
    const Pose2 qt(x[qi], x[qi + 1], x[qi + 2]);
    const Twist2 qd{x[di], x[di + 1], x[di + 2]};

    Eigen::Vector3d s = gravity_wrench(*obj, gravity);
    Eigen::Matrix3d s_dq = Eigen::Matrix3d::Zero();

    if (mode) {
      const WrenchTerm mw = manip_wrench(*obj, *mode, qt, &x[ui]);
      s += mw.w;
      s_dq += mw.dq;
      if (with_jacobians) {
        for (int rr = 0; rr < 3; ++rr)
          for (int cc = 0; cc < nu; ++cc)
            te.emplace_back(rb0 + 3 * t + rr, ui + cc, kWrenchRowScale * mw.du(rr, cc));
      }
      // manipulator friction cone rows
      if (mode->kind == ModeKind::OnePointSlide) {
        const int r = rm0 + 2 * t;
        const double un = x[ui + 1];
        const double ut = x[ui + 2];
        out.ineq[r] = mu_mnp * un - ut;
        out.ineq[r + 1] = mu_mnp * un + ut;
        add_i(r, ui + 1, mu_mnp);
        add_i(r, ui + 2, -1.0);
        add_i(r + 1, ui + 1, mu_mnp);
        add_i(r + 1, ui + 2, 1.0);
      } else {
        for (int i = 0; i < nc; ++i) {
          const int r = rm0 + 2 * (t * nc + i);
          const double un = x[ui + 2 * i];
          const double ut = x[ui + 2 * i + 1];
          out.ineq[r] = mu_mnp * un - ut;
          out.ineq[r + 1] = mu_mnp * un + ut;
          add_i(r, ui + 2 * i, mu_mnp);
          add_i(r, ui + 2 * i + 1, -1.0);
          add_i(r + 1, ui + 2 * i, mu_mnp);
          add_i(r + 1, ui + 2 * i + 1, 1.0);
        }
      }
    }

    for (int j = 0; j < P; ++j) {
      const ContactKinematics k = contact_kinematics(*obj, *env, qt, index_set.points[j].local);
      const GapValue gv = gap_value(k);
      const TangentialVelocity tv = tangential_velocity(k, qd);
      const int zi = layout.z(t, j);
      const double zn = x[zi];
      const double zp = x[zi + 1];
      const double zm = x[zi + 2];
      const double ga = x[zi + 3];
      const int base = 8 * (t * P + j);

      out.ineq[base] = gv.g;
      for (int c = 0; c < 3; ++c) add_i(base, qi + c, gv.dq[c]);

      out.ineq[base + 1] = mu_env * zn - zp - zm;
      add_i(base + 1, zi, mu_env);
      add_i(base + 1, zi + 1, -1.0);
      add_i(base + 1, zi + 2, -1.0);

      out.ineq[base + 2] = ga + tv.v;
      out.ineq[base + 3] = ga - tv.v;
      add_i(base + 2, zi + 3, 1.0);
      add_i(base + 3, zi + 3, 1.0);
      for (int c = 0; c < 3; ++c) {
        add_i(base + 2, qi + c, tv.dq[c]);
        add_i(base + 2, di + c, tv.dqd[c]);
        add_i(base + 3, qi + c, -tv.dq[c]);
        add_i(base + 3, di + c, -tv.dqd[c]);
      }

      out.ineq[base + 4] = zn;
      out.ineq[base + 5] = zp;
      out.ineq[base + 6] = zm;
      out.ineq[base + 7] = ga;
      add_i(base + 4, zi, 1.0);
      add_i(base + 5, zi + 1, 1.0);
      add_i(base + 6, zi + 2, 1.0);
      add_i(base + 7, zi + 3, 1.0);

      const WrenchTerm ew = env_contact_wrench(k, zn, zp, zm);
      s += ew.w;
      s_dq += ew.dq;
      if (with_jacobians) {
        for (int rr = 0; rr < 3; ++rr)
          for (int cc = 0; cc < 3; ++cc) te.emplace_back(rb0 + 3 * t + rr, zi + cc, kWrenchRowScale * ew.dz(rr, cc));
      }
    }

    for (int rr = 0; rr < 3; ++rr) {
      out.eq[rb0 + 3 * t + rr] = kWrenchRowScale * s[rr];
      for (int cc = 0; cc < 3; ++cc) add_e(rb0 + 3 * t + rr, qi + cc, kWrenchRowScale * s_dq(rr, cc));
    }
  }

  // non-penetration at the final pose (no paired force variables there)
  {
    const int qi = layout.q(T);
    const Pose2 qT(x[qi], x[qi + 1], x[qi + 2]);
    for (int j = 0; j < P; ++j) {
      const ContactKinematics k = contact_kinematics(*obj, *env, qT, index_set.points[j].local);
      const GapValue gv = gap_value(k);
      const int r = 8 * T * P + j;
      out.ineq[r] = gv.g;
      for (int c = 0; c < 3; ++c) add_i(r, qi + c, gv.dq[c]);
    }
  }

  // slide parameter rate limit between consecutive steps
  if (mode && mode->kind == ModeKind::OnePointSlide && T >= 2) {
    for (int t = 0; t + 1 < T; ++t) {
      const int r = rs0 + 2 * t;
      const int pa = layout.u(t);
      const int pb = layout.u(t + 1);
      const double d = x[pb] - x[pa];
      out.ineq[r] = slide_rate * dt - d;
      out.ineq[r + 1] = slide_rate * dt + d;
      add_i(r, pa, 1.0);
      add_i(r, pb, -1.0);
      add_i(r + 1, pa, -1.0);
      add_i(r + 1, pb, 1.0);
    }
  }

  if (with_jacobians) {
    out.jac_eq.resize(neq, N);
    out.jac_eq.setFromTriplets(te.begin(), te.end());
    out.jac_ineq.resize(nineq, N);
    out.jac_ineq.setFromTriplets(ti.begin(), ti.end());
  }
}

double MpccProblem::violation_l1(const Eigen::VectorXd& x) const {
  MpccEval ev;
  eval(x, ev, false);
  double v = ev.eq.cwiseAbs().sum();
  for (int i = 0; i < nineq; ++i) v += std::max(0.0, -ev.ineq[i]);
  for (const auto& cp : comp_pairs) v += std::abs(ev.ineq[cp.first] * ev.ineq[cp.second]);
  return v;
}

}  // namespace stocs
