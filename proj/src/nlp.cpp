#include "stocs/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

namespace stocs {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::IterLimit: return "IterLimit";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Aborted: return "Aborted";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void clamp_to_bounds(const MpccProblem& pb, Eigen::VectorXd& x) {
  for (int i = 0; i < pb.n(); ++i) x[i] = std::min(std::max(x[i], pb.lb[i]), pb.ub[i]);
}

bool finite_values(const MpccEval& ev) {
  return std::isfinite(ev.f) && ev.eq.allFinite() && ev.ineq.allFinite();
}

// l1 violation of the unrelaxed constraints, from already-computed values.
double violation_from(const MpccProblem& pb, const MpccEval& ev) {
  double v = ev.eq.cwiseAbs().sum();
  for (int i = 0; i < pb.nineq; ++i) v += std::max(0.0, -ev.ineq[i]);
  for (const auto& cp : pb.comp_pairs) v += std::abs(ev.ineq[cp.first] * ev.ineq[cp.second]);
  return v;
}

double violation_inf(const MpccProblem& pb, const MpccEval& ev, double rho) {
  double v = 0.0;
  for (int i = 0; i < pb.neq; ++i) v = std::max(v, std::abs(ev.eq[i]));
  for (int i = 0; i < pb.nineq; ++i) v = std::max(v, -ev.ineq[i]);
  for (const auto& cp : pb.comp_pairs)
    v = std::max(v, ev.ineq[cp.first] * ev.ineq[cp.second] - rho);
  return v;
}

void add_sparse_row(const SparseRowMat& J, int r, double coef, Eigen::VectorXd& g) {
  for (SparseRowMat::InnerIterator it(J, r); it; ++it) g[it.col()] += coef * it.value();
}

// Augmented Lagrangian value from constraint values; gradient optional.
double al_eval(const MpccProblem& pb, const MpccEval& ev, const Multipliers& m, double mu,
               double rho, Eigen::VectorXd* grad) {
  double L = ev.f;
  if (grad) *grad = ev.grad;
  for (int i = 0; i < pb.neq; ++i) {
    L += m.lambda[i] * ev.eq[i] + 0.5 * mu * ev.eq[i] * ev.eq[i];
    if (grad) add_sparse_row(ev.jac_eq, i, m.lambda[i] + mu * ev.eq[i], *grad);
  }
  const double inv2mu = 0.5 / mu;
  for (int i = 0; i < pb.nineq; ++i) {
    const double t = m.nu[i] - mu * ev.ineq[i];
    if (t > 0.0) {
      L += (t * t - m.nu[i] * m.nu[i]) * inv2mu;
      if (grad) add_sparse_row(ev.jac_ineq, i, -t, *grad);
    } else {
      L -= m.nu[i] * m.nu[i] * inv2mu;
    }
  }
  const int ncc = pb.ncc();
  for (int c = 0; c < ncc; ++c) {
    const int ia = pb.comp_pairs[c].first;
    const int ib = pb.comp_pairs[c].second;
    const double a = ev.ineq[ia];
    const double b = ev.ineq[ib];
    const double val = rho - a * b;  // treated as >= 0
    const double t = m.nuc[c] - mu * val;
    if (t > 0.0) {
      L += (t * t - m.nuc[c] * m.nuc[c]) * inv2mu;
      // d(val)/dx = -(a * Jb + b * Ja); the AL gradient term is -t * d(val)/dx
      if (grad) {
        add_sparse_row(ev.jac_ineq, ib, t * a, *grad);
        add_sparse_row(ev.jac_ineq, ia, t * b, *grad);
      }
    } else {
      L -= m.nuc[c] * m.nuc[c] * inv2mu;
    }
  }
  return L;
}

double projected_gradient_norm(const MpccProblem& pb, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g) {
  double r = 0.0;
  for (int i = 0; i < pb.n(); ++i) {
    const double step = std::min(std::max(x[i] - g[i], pb.lb[i]), pb.ub[i]) - x[i];
    r = std::max(r, std::abs(step));
  }
  return r;
}

std::vector<char> free_mask(const MpccProblem& pb, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& g) {
  std::vector<char> f(static_cast<size_t>(pb.n()), 1);
  const double eb = 1e-9;
  for (int i = 0; i < pb.n(); ++i) {
    const bool at_lo = x[i] <= pb.lb[i] + eb;
    const bool at_hi = x[i] >= pb.ub[i] - eb;
    if ((at_lo && g[i] > 0.0) || (at_hi && g[i] < 0.0)) f[static_cast<size_t>(i)] = 0;
  }
  return f;
}

struct KktProbe {
  bool ok = false;
  double residual = kInf;
};

// Least-squares multiplier test: at a feasible x, fit multipliers on the
// active rows and measure the stationarity residual over free coordinates.
// Cheap early-out that leaves x untouched when the incoming point is already
// a solution. Skipped for very large active sets.
KktProbe kkt_probe(const MpccProblem& pb, const MpccEval& ev, const Eigen::VectorXd& x,
                   double rho, const SolveSettings& st) {
  KktProbe out;
  const int n = pb.n();
  const double rows = static_cast<double>(pb.neq + pb.nineq + pb.ncc());
  double viol = ev.eq.cwiseAbs().sum();
  for (int i = 0; i < pb.nineq; ++i) viol += std::max(0.0, -ev.ineq[i]);
  for (const auto& cp : pb.comp_pairs)
    viol += std::max(0.0, ev.ineq[cp.first] * ev.ineq[cp.second] - rho);
  if (!(viol <= st.tol_feas * std::max(1.0, rows))) return out;

  std::vector<int> fidx(static_cast<size_t>(n), -1);
  int nf = 0;
  {
    const double eb = 1e-9;
    for (int i = 0; i < n; ++i) {
      if (x[i] > pb.lb[i] + eb && x[i] < pb.ub[i] - eb) fidx[static_cast<size_t>(i)] = nf++;
    }
  }
  Eigen::VectorXd gf(nf);
  for (int i = 0; i < n; ++i)
    if (fidx[static_cast<size_t>(i)] >= 0) gf[fidx[static_cast<size_t>(i)]] = ev.grad[i];
  const double gscale = 1.0 + ev.grad.cwiseAbs().maxCoeff();

  // active rows: all equalities, near-zero inequalities, near-active relaxed pairs
  const double act_tol = 1e-6;
  struct Row {
    int kind;  // 0 eq, 1 ineq, 2 comp
    int idx;
  };
  std::vector<Row> act;
  for (int i = 0; i < pb.neq; ++i) act.push_back({0, i});
  for (int i = 0; i < pb.nineq; ++i)
    if (ev.ineq[i] <= act_tol) act.push_back({1, i});
  const int ncc = pb.ncc();
  for (int c = 0; c < ncc; ++c) {
    const double a = ev.ineq[pb.comp_pairs[c].first];
    const double b = ev.ineq[pb.comp_pairs[c].second];
    if (rho - a * b <= act_tol) act.push_back({2, c});
  }
  const int m = static_cast<int>(act.size());
  if (m > 1200 || nf > 20000) return out;
  if (m == 0) {
    out.residual = nf > 0 ? gf.cwiseAbs().maxCoeff() : 0.0;
    out.ok = out.residual <= st.tol_kkt * gscale;
    return out;
  }

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, nf);
  auto scatter = [&](int r, const SparseRowMat& J, int row, double coef) {
    for (SparseRowMat::InnerIterator it(J, row); it; ++it) {
      const int fc = fidx[static_cast<size_t>(it.col())];
      if (fc >= 0) A(r, fc) += coef * it.value();
    }
  };
  for (int r = 0; r < m; ++r) {
    if (act[static_cast<size_t>(r)].kind == 0) {
      scatter(r, ev.jac_eq, act[static_cast<size_t>(r)].idx, 1.0);
    } else if (act[static_cast<size_t>(r)].kind == 1) {
      scatter(r, ev.jac_ineq, act[static_cast<size_t>(r)].idx, 1.0);
    } else {
      const auto& cp = pb.comp_pairs[static_cast<size_t>(act[static_cast<size_t>(r)].idx)];
      const double a = ev.ineq[cp.first];
      const double b = ev.ineq[cp.second];
      scatter(r, ev.jac_ineq, cp.second, -a);
      scatter(r, ev.jac_ineq, cp.first, -b);
    }
  }
  Eigen::MatrixXd M = A * A.transpose();
  M.diagonal().array() += 1e-12;
  Eigen::VectorXd y = M.ldlt().solve(-A * gf);
  for (int r = 0; r < m; ++r)
    if (act[static_cast<size_t>(r)].kind != 0) y[r] = std::max(0.0, y[r]);
  out.residual = (gf + A.transpose() * y).cwiseAbs().maxCoeff();
  out.ok = out.residual <= st.tol_kkt * gscale;
  return out;
}

// Gauss-Newton model Hessian of the AL over the free coordinates.
// base = mu * (active rows)' (active rows); diagonal gets the exact objective
// curvature plus the damping term.
struct NewtonWorkspace {
  std::vector<Eigen::Triplet<double>> trip;
};

bool solve_newton_direction(const MpccProblem& pb, const MpccEval& ev, const Multipliers& ml,
                            double mu, double rho, const Eigen::VectorXd& g,
                            const std::vector<char>& fmask, double tau, NewtonWorkspace& ws,
                            Eigen::VectorXd& d) {
  const int n = pb.n();
  std::vector<int> fidx(static_cast<size_t>(n), -1);
  int nf = 0;
  for (int i = 0; i < n; ++i)
    if (fmask[static_cast<size_t>(i)]) fidx[static_cast<size_t>(i)] = nf++;
  d.setZero(n);
  if (nf == 0) return false;

  // Stack the rows that carry curvature: equalities always, inequalities and
  // relaxed pairs only while their AL branch is active.
  ws.trip.clear();
  int row = 0;
  auto push_row = [&](const SparseRowMat& J, int r, double coef) {
    for (SparseRowMat::InnerIterator it(J, r); it; ++it) {
      const int fc = fidx[static_cast<size_t>(it.col())];
      if (fc >= 0) ws.trip.emplace_back(row, fc, coef * it.value());
    }
  };
  for (int i = 0; i < pb.neq; ++i) {
    push_row(ev.jac_eq, i, 1.0);
    ++row;
  }
  // Rows sitting on their boundary get curvature too: without it the model
  // is free to step across val = 0 and the line search pays for it.
  for (int i = 0; i < pb.nineq; ++i) {
    if (ml.nu[i] - mu * ev.ineq[i] > 0.0 || ev.ineq[i] <= 1e-6) {
      push_row(ev.jac_ineq, i, 1.0);
      ++row;
    }
  }
  const int ncc = pb.ncc();
  for (int c = 0; c < ncc; ++c) {
    const int ia = pb.comp_pairs[c].first;
    const int ib = pb.comp_pairs[c].second;
    const double a = ev.ineq[ia];
    const double b = ev.ineq[ib];
    const double cval = rho - a * b;
    if (ml.nuc[c] - mu * cval > 0.0 || cval <= 1e-6) {
      push_row(ev.jac_ineq, ib, a);
      push_row(ev.jac_ineq, ia, b);
      ++row;
    }
  }
  SparseRowMat A(row, nf);
  A.setFromTriplets(ws.trip.begin(), ws.trip.end());
  Eigen::SparseMatrix<double> H = Eigen::SparseMatrix<double>(A.transpose()) * A;
  H *= mu;
  // exact objective curvature + damping on the diagonal
  std::vector<Eigen::Triplet<double>> diag;
  diag.reserve(static_cast<size_t>(nf));
  for (int i = 0; i < n; ++i) {
    const int fc = fidx[static_cast<size_t>(i)];
    if (fc >= 0) diag.emplace_back(fc, fc, pb.obj_hess_diag[i] + tau);
  }
  Eigen::SparseMatrix<double> D(nf, nf);
  D.setFromTriplets(diag.begin(), diag.end());
  H += D;

  Eigen::VectorXd gf(nf);
  for (int i = 0; i < n; ++i)
    if (fidx[static_cast<size_t>(i)] >= 0) gf[fidx[static_cast<size_t>(i)]] = g[i];

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(H);
  if (ldlt.info() != Eigen::Success) return false;
  Eigen::VectorXd df = ldlt.solve(-gf);
  if (!df.allFinite()) return false;
  const double gd = gf.dot(df);
  if (!(gd < -1e-14 * std::max(1.0, gf.norm() * df.norm()))) return false;
  for (int i = 0; i < n; ++i)
    if (fidx[static_cast<size_t>(i)] >= 0) d[i] = df[fidx[static_cast<size_t>(i)]];
  return true;
}

// Feasibility restoration: projected Gauss-Newton on
//   Phi = 0.5 (|eq|^2 + |min(ineq,0)|^2 + sum (a*b)^2)
// under the variable bounds. Polishes the most feasible iterate found so a
// final infeasibility verdict is a statement about the problem, not the run.
// How a restoration run ended. Only a Stationary exit says anything about
// feasibility: the quadratic residual has a vanishing projected gradient at a
// violating point. Running out of budget or step size proves nothing.
enum class RestoreExit { Feasible, Stationary, Budget };

RestoreExit restore_feasibility(const MpccProblem& pb, Eigen::VectorXd& x, double* phi_grad_inf) {
  const int n = pb.n();
  MpccEval ev;
  NewtonWorkspace ws;
  double tau = 1e-8;
  double phi = kInf;
  double pg = kInf;
  *phi_grad_inf = kInf;
  const auto classify = [&]() {
    if (phi <= 1e-10) return RestoreExit::Feasible;
    return pg <= 1e-8 ? RestoreExit::Stationary : RestoreExit::Budget;
  };
  for (int it = 0; it < 300; ++it) {
    pb.eval(x, ev, true);
    if (!finite_values(ev)) return RestoreExit::Budget;
    phi = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    ws.trip.clear();
    int row = 0;
    auto push_row = [&](const SparseRowMat& J, int r, double coef) {
      for (SparseRowMat::InnerIterator it2(J, r); it2; ++it2)
        ws.trip.emplace_back(row, it2.col(), coef * it2.value());
    };
    for (int i = 0; i < pb.neq; ++i) {
      phi += 0.5 * ev.eq[i] * ev.eq[i];
      add_sparse_row(ev.jac_eq, i, ev.eq[i], g);
      push_row(ev.jac_eq, i, 1.0);
      ++row;
    }
    for (int i = 0; i < pb.nineq; ++i) {
      if (ev.ineq[i] < 0.0) {
        phi += 0.5 * ev.ineq[i] * ev.ineq[i];
        add_sparse_row(ev.jac_ineq, i, ev.ineq[i], g);
        push_row(ev.jac_ineq, i, 1.0);
        ++row;
      }
    }
    for (const auto& cp : pb.comp_pairs) {
      const double a = ev.ineq[cp.first];
      const double b = ev.ineq[cp.second];
      const double r = a * b;
      if (r != 0.0) {
        phi += 0.5 * r * r;
        add_sparse_row(ev.jac_ineq, cp.second, r * a, g);
        add_sparse_row(ev.jac_ineq, cp.first, r * b, g);
      }
      push_row(ev.jac_ineq, cp.second, a);
      push_row(ev.jac_ineq, cp.first, b);
      ++row;
    }
    pg = projected_gradient_norm(pb, x, g);
    *phi_grad_inf = pg;
    if (phi <= 1e-10 || pg <= 1e-10) return classify();

    std::vector<int> fidx(static_cast<size_t>(n), -1);
    int nf = 0;
    const std::vector<char> fm = free_mask(pb, x, g);
    for (int i = 0; i < n; ++i)
      if (fm[static_cast<size_t>(i)]) fidx[static_cast<size_t>(i)] = nf++;
    if (nf == 0) return classify();
    // remap columns to the free set
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(ws.trip.size() + static_cast<size_t>(nf));
    for (const auto& t : ws.trip) {
      const int fc = fidx[static_cast<size_t>(t.col())];
      if (fc >= 0) trip.emplace_back(t.row(), fc, t.value());
    }
    SparseRowMat A(row, nf);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> H = Eigen::SparseMatrix<double>(A.transpose()) * A;
    std::vector<Eigen::Triplet<double>> diag;
    for (int i = 0; i < nf; ++i) diag.emplace_back(i, i, tau);
    Eigen::SparseMatrix<double> D(nf, nf);
    D.setFromTriplets(diag.begin(), diag.end());
    H += D;
    Eigen::VectorXd gf(nf);
    for (int i = 0; i < n; ++i)
      if (fidx[static_cast<size_t>(i)] >= 0) gf[fidx[static_cast<size_t>(i)]] = g[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(H);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    bool have_dir = false;
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd df = ldlt.solve(-gf);
      if (df.allFinite() && gf.dot(df) < 0.0) {
        for (int i = 0; i < n; ++i)
          if (fidx[static_cast<size_t>(i)] >= 0) d[i] = df[fidx[static_cast<size_t>(i)]];
        have_dir = true;
      }
    }
    if (!have_dir) {
      for (int i = 0; i < n; ++i)
        if (fidx[static_cast<size_t>(i)] >= 0) d[i] = -g[i];
    }
    // backtracking on Phi
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Eigen::VectorXd xt = x + alpha * d;
      clamp_to_bounds(pb, xt);
      MpccEval evt;
      pb.eval(xt, evt, false);
      if (finite_values(evt)) {
        double phit = 0.0;
        for (int i = 0; i < pb.neq; ++i) phit += 0.5 * evt.eq[i] * evt.eq[i];
        for (int i = 0; i < pb.nineq; ++i)
          if (evt.ineq[i] < 0.0) phit += 0.5 * evt.ineq[i] * evt.ineq[i];
        for (const auto& cp : pb.comp_pairs) {
          const double r = evt.ineq[cp.first] * evt.ineq[cp.second];
          phit += 0.5 * r * r;
        }
        if (phit < phi - 1e-12 * std::max(1.0, phi)) {
          x = xt;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      tau = std::min(tau * 10.0, 1e10);
      if (tau >= 1e10) return classify();
    } else {
      tau = std::max(tau * 0.3, 1e-10);
    }
  }
  return classify();
}

}  // namespace

SolveResult solve(const MpccProblem& pb, const Eigen::VectorXd& x0, const SolveSettings& st) {
  SolveResult res;
  const int n = pb.n();
  Eigen::VectorXd x = x0;
  clamp_to_bounds(pb, x);
  res.x = x;

  MpccEval ev;
  pb.eval(x, ev, true);
  if (!finite_values(ev)) {
    res.status = SolveStatus::Infeasible;
    res.stats.feas_residual = kInf;
    return res;
  }

  Multipliers ml;
  if (st.warm && st.warm->lambda.size() == pb.neq && st.warm->nu.size() == pb.nineq &&
      st.warm->nuc.size() == pb.ncc()) {
    ml = *st.warm;
  } else {
    ml.lambda = Eigen::VectorXd::Zero(pb.neq);
    ml.nu = Eigen::VectorXd::Zero(pb.nineq);
    ml.nuc = Eigen::VectorXd::Zero(pb.ncc());
  }

  double mu = st.penalty_init;
  double rho = st.comp_relaxation_init;
  double omega = 1e-2;
  const double omega_floor = 0.5 * st.tol_kkt;
  double tau = 1e-8;

  // Carried-in dual estimates are only trustworthy near the constraint
  // manifold. A start this far out means the caller's problem changed
  // substantially since they were formed, so drop them.
  if (violation_inf(pb, ev, rho) > 1.0) {
    ml.lambda.setZero();
    ml.nu.setZero();
    ml.nuc.setZero();
  }

  // What gets handed back for the next warm start: the estimates that were in
  // force at the least-violating iterate, not whatever the final penalty
  // escalation left behind.
  Multipliers ml_ret = ml;
  struct WarmSaver {
    Multipliers* dst;
    const Multipliers& src;
    ~WarmSaver() {
      if (dst) *dst = src;
    }
  } warm_saver{st.warm, ml_ret};

  // Returned-iterate selection weighs feasibility on the same scale the
  // caller's merit does, so an iteration-limited return is still a usable
  // step for the outer loop rather than a low-cost infeasible excursion.
  const double kReturnFeasWeight = 1e3;
  Eigen::VectorXd best_x = x;
  double best_viol = violation_from(pb, ev);
  double best_score = ev.f + kReturnFeasWeight * best_viol;
  // Feasibility bar for first-order dual updates. Refreshing the duals at a
  // badly infeasible point bakes the violation into them, so below the bar we
  // update, above it we stiffen the penalty instead.
  double eta = std::pow(mu, -0.1);

  // Least-violating iterate seen, kept separately from the scored best: it is
  // the right launch point for feasibility restoration, and the half-budget
  // snapshot distinguishes a stalled run from one that simply ran out of time.
  Eigen::VectorXd viol_min_x = x;
  double viol_min = best_viol;
  double viol_half = best_viol;

  auto track_best = [&](const MpccEval& e, const Eigen::VectorXd& xx) {
    const double v = violation_from(pb, e);
    const double s = e.f + kReturnFeasWeight * v;
    if (s < best_score) {
      best_score = s;
      best_viol = v;
      best_x = xx;
    }
    if (v < viol_min) {
      viol_min = v;
      viol_min_x = xx;
      ml_ret = ml;
    }
  };

  int iters = 0;
  int updates_since_newton = 0;
  bool want_probe = true;
  bool force_update = false;
  int slow_steps = 0;
  double last_kkt = kInf;
  NewtonWorkspace ws;
  Eigen::VectorXd g(n), d(n);

  while (true) {
    if (st.interrupt && st.interrupt()) {
      res.status = SolveStatus::Aborted;
      res.x = best_x;
      res.stats.iterations = iters;
      res.stats.kkt_residual = last_kkt;
      res.stats.feas_residual = best_viol;
      return res;
    }

    if (want_probe) {
      want_probe = false;
      const KktProbe probe = kkt_probe(pb, ev, x, rho, st);
      last_kkt = probe.residual;
      if (probe.ok) {
        res.status = SolveStatus::Converged;
        res.x = x;
        res.stats.iterations = iters;
        res.stats.kkt_residual = probe.residual;
        res.stats.feas_residual = violation_from(pb, ev);
        return res;
      }
    }

    const double L = al_eval(pb, ev, ml, mu, rho, &g);
    const double pg = projected_gradient_norm(pb, x, g);

    // Stationary at the current relaxation but not at a point the probe
    // accepts: tighten the complementarity relaxation and continue.
    if (pg <= st.tol_kkt && rho > 1e-12) {
      rho = std::max(rho * st.comp_relaxation_shrink, 1e-12);
      want_probe = true;
      continue;
    }

    if ((pg <= omega || force_update) && updates_since_newton < 3) {
      const double viol_now = violation_inf(pb, ev, rho);
      if (viol_now <= std::max(eta, 10.0 * st.tol_feas)) {
        for (int i = 0; i < pb.neq; ++i) ml.lambda[i] += mu * ev.eq[i];
        for (int i = 0; i < pb.nineq; ++i) ml.nu[i] = std::max(0.0, ml.nu[i] - mu * ev.ineq[i]);
        const int ncc = pb.ncc();
        for (int c = 0; c < ncc; ++c) {
          const double a = ev.ineq[pb.comp_pairs[c].first];
          const double b = ev.ineq[pb.comp_pairs[c].second];
          ml.nuc[c] = std::max(0.0, ml.nuc[c] - mu * (rho - a * b));
        }
        eta = std::max(eta * std::pow(mu, -0.9), 1e-8);
        omega = std::max(omega * 0.2, omega_floor);
      } else {
        mu = std::min(mu * st.penalty_growth, 1e12);
        eta = std::min(eta, std::pow(mu, -0.1));
        omega = std::max(1.0 / mu, omega_floor);
      }
      force_update = false;
      ++updates_since_newton;
      want_probe = true;
      slow_steps = 0;
      continue;
    }

    if (iters >= st.max_iters) break;

    const std::vector<char> fm = free_mask(pb, x, g);
    bool have_dir = false;
    while (!have_dir) {
      have_dir = solve_newton_direction(pb, ev, ml, mu, rho, g, fm, tau, ws, d);
      if (!have_dir) {
        tau *= 10.0;
        if (tau > 1e10) {
          d.setZero(n);
          for (int i = 0; i < n; ++i)
            if (fm[static_cast<size_t>(i)]) d[i] = -g[i];
          have_dir = true;
        }
      }
    }

    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd xt;
    MpccEval evt;
    for (int ls = 0; ls < 40; ++ls) {
      xt = x + alpha * d;
      clamp_to_bounds(pb, xt);
      const double dd = g.dot(xt - x);
      if (dd < 0.0) {
        pb.eval(xt, evt, false);
        if (finite_values(evt)) {
          const double Lt = al_eval(pb, evt, ml, mu, rho, nullptr);
          if (Lt <= L + 1e-4 * dd) {
            accepted = true;
            break;
          }
        }
      }
      alpha *= 0.5;
    }

    ++iters;
    updates_since_newton = 0;
    if (iters == st.max_iters / 2) viol_half = viol_min;

    if (accepted) {
      x = xt;
      const double Lt = al_eval(pb, evt, ml, mu, rho, nullptr);
      pb.eval(x, ev, true);
      track_best(ev, x);
      if (alpha == 1.0) {
        tau = std::max(tau * 0.3, 1e-10);
      } else if (alpha < 0.25) {
        tau = std::min(tau * 2.0, 1e10);
      }
      // A string of accepted steps that barely move L means the subproblem is
      // as solved as this penalty level allows: refresh the multipliers.
      if (L - Lt <= 1e-4 * std::max(1.0, std::abs(L))) {
        if (++slow_steps >= 3) {
          force_update = true;
          slow_steps = 0;
        }
      } else {
        slow_steps = 0;
      }
    } else {
      tau = std::min(tau * 10.0, 1e10);
      force_update = true;
      slow_steps = 0;
    }

    if (st.iter_log) {
      (*st.iter_log) << iters << ',' << L << ',' << ev.f << ',' << violation_from(pb, ev) << ','
                     << mu << ',' << rho << ',' << pg << ',' << (accepted ? alpha : 0.0) << '\n';
    }
  }

  // budget exhausted: one more stationarity probe at the current point
  {
    const KktProbe probe = kkt_probe(pb, ev, x, rho, st);
    last_kkt = probe.residual;
    if (probe.ok) {
      res.status = SolveStatus::Converged;
      res.x = x;
      res.stats.iterations = iters;
      res.stats.kkt_residual = probe.residual;
      res.stats.feas_residual = violation_from(pb, ev);
      return res;
    }
  }

  track_best(ev, x);
  res.x = best_x;
  res.stats.iterations = iters;
  res.stats.kkt_residual = last_kkt;
  res.stats.feas_residual = best_viol;
  res.status = SolveStatus::IterLimit;

  // Restoration gathers evidence for an infeasibility verdict, so it runs only
  // when the violation has stopped improving; a run that was still descending
  // when the budget ran out just reports the iteration limit.
  const bool stalled = viol_min > 0.95 * viol_half;
  if (best_viol > 1e-3 && stalled) {
    double phi_grad = kInf;
    Eigen::VectorXd xr = viol_min_x;
    const RestoreExit exa = restore_feasibility(pb, xr, &phi_grad);
    MpccEval evr;
    pb.eval(xr, evr, true);
    if (finite_values(evr)) {
      double vr = violation_from(pb, evr);
      bool confirmed = vr > 1e-3 && exa == RestoreExit::Stationary;
      if (confirmed) {
        // The product terms make the restoration objective nonconvex, and a
        // pinned product can hold a local minimum above the verdict line.
        // Before declaring the problem infeasible, retry from the other
        // complementarity branch: zero the bound-side variable of every pair
        // whose product is still active.
        Eigen::VectorXd xb = xr;
        for (const auto& cp : pb.comp_pairs) {
          const double a = evr.ineq[cp.first];
          const double b = evr.ineq[cp.second];
          if (std::abs(a * b) <= 1e-10) continue;
          for (const int side : {cp.second, cp.first}) {
            SparseRowMat::InnerIterator it(evr.jac_ineq, side);
            if (!it) continue;
            const int col = static_cast<int>(it.col());
            ++it;
            if (it) continue;  // not a one-variable bound row
            xb[col] = 0.0;
            break;
          }
        }
        clamp_to_bounds(pb, xb);
        double phi_grad_b = kInf;
        const RestoreExit exb = restore_feasibility(pb, xb, &phi_grad_b);
        MpccEval evb;
        pb.eval(xb, evb, false);
        if (finite_values(evb)) {
          const double vb = violation_from(pb, evb);
          if (vb < vr) {
            vr = vb;
            xr = std::move(xb);
          }
          confirmed = vr > 1e-3 && exa == RestoreExit::Stationary &&
                      exb == RestoreExit::Stationary;
        }
      }
      if (vr < best_viol) {
        best_viol = vr;
        best_x = xr;
        res.x = xr;
        res.stats.feas_residual = vr;
      }
      if (confirmed) res.status = SolveStatus::Infeasible;
    }
  }
  return res;
}

}  // namespace stocs
