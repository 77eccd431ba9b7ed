#include "stocs/verify.hpp"

#include <cmath>
#include <sstream>

#include "stocs/kernels.hpp"

namespace stocs {

VerifyReport verify_trajectory(const Scenario& scn, const ManipulationMode* mode,
                               const std::vector<TrajectoryState>& trajectory,
                               const IndexSet& index_set, double dt,
                               const VerifyTolerances& tol) {
  VerifyReport r;
  if (trajectory.empty()) return r;
  const int T = static_cast<int>(trajectory.size()) - 1;
  const int P = index_set.size();
  r.n_cc = 6 * T * P;

  const kernels::EnvData ed = kernels::EnvData::build(scn.environment);
  const kernels::PointsSoA bd = kernels::PointsSoA::build(scn.object.boundary_points);

  r.steps.resize(static_cast<size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    const kernels::ScanResult s = kernels::scan_gaps(ed, bd, trajectory[static_cast<size_t>(t)].q);
    const double pen = std::max(0.0, -s.min_gap);
    r.steps[static_cast<size_t>(t)].penetration = pen;
    if (pen > r.max_penetration) {
      r.max_penetration = pen;
      r.worst_penetration_step = t;
    }
  }

  for (int t = 0; t < T; ++t) {
    const TrajectoryState& s = trajectory[static_cast<size_t>(t)];
    const TrajectoryState& nx = trajectory[static_cast<size_t>(t) + 1];
    const double dfx = std::abs(s.q.x + dt * s.qdot.vx - nx.q.x);
    const double dfy = std::abs(s.q.y + dt * s.qdot.vy - nx.q.y);
    const double dfth = std::abs(s.theta_unwrapped + dt * s.qdot.omega - nx.theta_unwrapped);
    r.max_dynamics_defect = std::max({r.max_dynamics_defect, dfx, dfy, dfth});

    std::vector<std::pair<IndexPoint, ContactForce>> contacts;
    contacts.reserve(static_cast<size_t>(P));
    for (int j = 0; j < P; ++j) {
      ContactForce f;
      if (j < static_cast<int>(s.forces.size())) f = s.forces[static_cast<size_t>(j)];
      contacts.emplace_back(index_set.points[static_cast<size_t>(j)], f);
    }
    const double* u = (mode && s.u.size() == mode->nu()) ? s.u.data() : nullptr;
    const Eigen::Vector3d bal =
        wrench_balance(scn.object, scn.environment, s.q, mode, u, contacts, scn.gravity);
    const double l1 = bal.cwiseAbs().sum();
    r.steps[static_cast<size_t>(t)].balance_l1 = l1;
    if (l1 > r.max_balance_l1) {
      r.max_balance_l1 = l1;
      r.worst_balance_step = t;
    }

    double comp_t = 0.0;
    for (int j = 0; j < P; ++j) {
      const ContactKinematics k = contact_kinematics(
          scn.object, scn.environment, s.q, index_set.points[static_cast<size_t>(j)].local);
      const double gap = gap_value(k).g;
      const double v = tangential_velocity(k, s.qdot).v;
      const ContactForce& f = contacts[static_cast<size_t>(j)].second;
      const double ga = j < static_cast<int>(s.slack.size()) ? s.slack[static_cast<size_t>(j)] : 0.0;
      const double cone = friction_residual(scn.object.mu_env, f);
      comp_t += std::abs(f.zn * gap);
      comp_t += std::abs(f.zp * gap);
      comp_t += std::abs(f.zm * gap);
      comp_t += std::abs(f.zp * (ga + v));
      comp_t += std::abs(f.zm * (ga - v));
      comp_t += std::abs(ga * cone);
    }
    r.steps[static_cast<size_t>(t)].comp_gap = comp_t;
    r.comp_gap_sum += comp_t;
  }

  r.penetration_ok = r.max_penetration <= tol.penetration;
  r.balance_ok = r.max_balance_l1 <= tol.balance_l1;
  r.comp_ok = r.comp_gap_sum <= tol.comp_gap_per_pair * std::max(1, r.n_cc);
  r.dynamics_ok = r.max_dynamics_defect <= tol.dynamics_defect;
  r.pass = r.penetration_ok && r.balance_ok && r.comp_ok && r.dynamics_ok;
  return r;
}

std::string format_verify_report(const VerifyReport& r) {
  std::ostringstream o;
  o << "verify: " << (r.pass ? "PASS" : "FAIL") << '\n';
  o << "  penetration  max=" << r.max_penetration << " step=" << r.worst_penetration_step
    << (r.penetration_ok ? "  ok" : "  VIOLATED") << '\n';
  o << "  balance(l1)  max=" << r.max_balance_l1 << " step=" << r.worst_balance_step
    << (r.balance_ok ? "  ok" : "  VIOLATED") << '\n';
  o << "  complementarity  sum=" << r.comp_gap_sum << " pairs=" << r.n_cc
    << (r.comp_ok ? "  ok" : "  VIOLATED") << '\n';
  o << "  integration  max=" << r.max_dynamics_defect
    << (r.dynamics_ok ? "  ok" : "  VIOLATED") << '\n';
  return o.str();
}

std::string format_verify_steps(const VerifyReport& r) {
  std::ostringstream o;
  o << "step,penetration,balance_l1,comp_gap\n";
  for (size_t t = 0; t < r.steps.size(); ++t) {
    const VerifyReport::Step& s = r.steps[t];
    o << t << ',' << s.penetration << ',' << s.balance_l1 << ',' << s.comp_gap << '\n';
  }
  return o.str();
}

}  // namespace stocs
