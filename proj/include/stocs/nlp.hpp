#pragma once

#include <functional>
#include <iosfwd>

#include <Eigen/Core>

#include "stocs/mpcc.hpp"

namespace stocs {

// Augmented-Lagrangian multiplier estimates. A caller that solves a sequence
// of related problems can pass these back in to keep the solver from
// re-learning the duals (and excursing through infeasibility) on every call.
struct Multipliers {
  Eigen::VectorXd lambda;  // equality rows
  Eigen::VectorXd nu;      // inequality rows
  Eigen::VectorXd nuc;     // relaxed complementarity rows
};

struct SolveSettings {
  int max_iters = 100;                   // Newton-step budget
  double comp_relaxation_init = 1e-2;    // rho in rho - a*b >= 0
  double comp_relaxation_shrink = 0.2;
  double penalty_init = 10.0;
  double penalty_growth = 10.0;
  double tol_kkt = 1e-6;
  double tol_feas = 1e-8;                // per-row feasibility target
  Multipliers* warm = nullptr;           // in/out dual estimates (optional)
  std::ostream* iter_log = nullptr;      // optional CSV trace
  std::function<bool()> interrupt;       // return true to abort (resource caps)
};

enum class SolveStatus { Converged, IterLimit, Infeasible, Aborted };

const char* to_string(SolveStatus s);

struct SolveStats {
  int iterations = 0;
  double kkt_residual = 0.0;
  double feas_residual = 0.0;  // l1 violation of the returned iterate
};

struct SolveResult {
  SolveStatus status = SolveStatus::IterLimit;
  Eigen::VectorXd x;
  SolveStats stats;
};

// Augmented-Lagrangian solve of the complementarity-relaxed problem from x0.
// Returns the best iterate by objective + l1 violation; the returned x
// satisfies the variable bounds exactly.
SolveResult solve(const MpccProblem& problem, const Eigen::VectorXd& x0,
                  const SolveSettings& settings);

}  // namespace stocs
