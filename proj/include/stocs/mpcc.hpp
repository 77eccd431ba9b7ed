#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stocs/contact.hpp"
#include "stocs/scenario.hpp"

namespace stocs {

// The instantiated contact point set, shared by every time step. Grows
// monotonically across outer iterations; points never leave.
struct IndexSet {
  std::vector<IndexPoint> points;

  int size() const { return static_cast<int>(points.size()); }
  bool contains(const Vec2& local, double tol = 1e-6) const;
  // Adds unless a point within tol already exists; returns whether added.
  bool add(const IndexPoint& p, double tol = 1e-6);
};

struct MpccWeights {
  double w1 = 1.0;
  double w2 = 1.0;
  double W = 5.0;
};

// Wrench-balance rows are assembled premultiplied by this factor. The balance
// equations are in newtons while the kinematic rows are in metres; left as-is,
// a penalty-method solver happily trades a milli-newton of force imbalance for
// a milli-metre of kinematic polish, which is a bad bargain at these force
// scales. Diagnostics that report physical balance residuals divide it out.
inline constexpr double kWrenchRowScale = 9.0;

// Decision vector layout, a pure function of (T, nu, P):
// per step t in [0, T): [q_t(3) | qd_t(3) | u_t(nu) | z_t(4P: zn,zp,zm,gamma per point)],
// then q_T(3) at the tail.
struct MpccLayout {
  int T = 0;
  int nu = 0;
  int P = 0;

  int stride() const { return 6 + nu + 4 * P; }
  int n() const { return T * stride() + 3; }
  int q(int t) const { return t * stride(); }  // valid for t in [0, T]
  int qd(int t) const { return t * stride() + 3; }
  int u(int t) const { return t * stride() + 6; }
  int z(int t, int j) const { return t * stride() + 6 + nu + 4 * j; }
};

using SparseRowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct MpccEval {
  double f = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd eq;
  Eigen::VectorXd ineq;
  SparseRowMat jac_eq;    // neq x n
  SparseRowMat jac_ineq;  // nineq x n
};

// The finite trajectory problem over the instantiated index set:
//   min f(x)  s.t.  eq(x) = 0, ineq(x) >= 0, lb <= x <= ub,
//   and ineq[pair.first] * ineq[pair.second] = 0 for each complementarity pair.
//
// Row order (see docs/problem_layout.md):
//   eq:   [q_0 - q_start (3)] [Euler per t (3T)] [wrench balance per t (3T)]
//   ineq: per t in [0,T), per point j: [gap, cone, gamma+v, gamma-v, zn, zp, zm, gamma],
//         then final-pose gaps (P), manipulator cones (2 per contact per t),
//         then slide-rate windows (2(T-1), one-point-slide only).
struct MpccProblem {
  MpccLayout layout;
  double dt = 0.1;

  const ObjectModel* obj = nullptr;
  const EnvironmentModel* env = nullptr;
  const ManipulationMode* mode = nullptr;  // null: no manipulator
  double gravity = 9.8;

  Pose2 q_start;
  Twist2 qd_start;
  IndexSet index_set;

  MpccWeights weights;
  double goal_x = 0.0, goal_y = 0.0, goal_theta = 0.0;  // theta unwrapped near start
  double regularization = 1e-4;
  double slide_rate = 2.0;  // max |dp/dt| for the slide parameter, face fractions per second

  Eigen::VectorXd lb, ub;
  Eigen::VectorXd obj_hess_diag;  // constant diagonal objective Hessian

  int neq = 0;
  int nineq = 0;
  std::vector<std::pair<int, int>> comp_pairs;  // indices into ineq rows

  int n() const { return layout.n(); }
  int ncc() const { return static_cast<int>(comp_pairs.size()); }

  void eval(const Eigen::VectorXd& x, MpccEval& out, bool with_jacobians = true) const;

  double objective(const Eigen::VectorXd& x) const;

  // l1 norm of (eq residuals, negative ineq parts, complementarity products).
  double violation_l1(const Eigen::VectorXd& x) const;
};

// Builds the problem. q_goal's angle is unwrapped to the shortest-path image
// around q_start.theta; decision-vector angles are unwrapped likewise.
MpccProblem assemble(const Scenario& scn, const ManipulationMode* mode, const Pose2& q_start,
                     const Pose2& q_goal, const IndexSet& index_set, int T, double dt,
                     const MpccWeights& weights);

// Documented closed-form counts used by tests and docs.
int expected_neq(int T);
int expected_nineq(int T, int P, const ManipulationMode* mode);
int expected_ncc(int T, int P);

}  // namespace stocs
