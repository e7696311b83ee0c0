#pragma once

// Safeguarded augmented Lagrangian outer loop.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geoqp/inner_solvers.hpp"
#include "geoqp/problem.hpp"
#include "geoqp/subproblem.hpp"

namespace geoqp {

struct AlmOptions {
  double eps_d = 1e-6;
  double eps_p = 1e-6;
  double kappa_V = 0.9;     ///< in [0, 1)
  double kappa_eps = 0.5;   ///< in (0, 1)
  double kappa_mu = 0.25;   ///< in (0, 1)
  double kappa_rho = 1.0;   ///< in (0, 1]
  double eps_1 = 1.0;
  double mu_1 = 1.0;
  double rho_1 = 1e-6;
  double y_max = 1e20;      ///< safeguarding box [-y_max, y_max]^m
  double time_limit_s = 100.0;
  Index max_outer = 500;
  Formulation formulation = Formulation::condensed_hard;
  Subsolver subsolver = Subsolver::panoc;
  // Infeasibility heuristic: mu below the floor, V stagnant over a window,
  // and infeasible stationarity of x.
  double mu_floor = 1e-12;
  int stagnation_window = 5;
  double stagnation_decrease = 0.01;
  InnerOptions inner;

  /// Throws std::invalid_argument when a parameter leaves its admissible range.
  void check() const;
};

enum class AlmStatus { solved, infeasible_stationary, time_limit, iteration_cap };

std::string to_string(AlmStatus s);
/// CLI exit code: 0 solved, 2 infeasible-stationary, 3 time-limit, 4 iteration-cap.
int exit_code(AlmStatus s);

struct AlmHistoryRow {
  Index k = 0;
  double rho = 0.0, mu = 0.0, eps = 0.0;
  double E = 0.0, V = 0.0;
  Index inner_iterations = 0;
  Index gradient_evaluations = 0;
  double elapsed_s = 0.0;
  InnerStatus inner_status = InnerStatus::converged;
};

struct AlmState {
  Index k = 1;
  PenaltyPair sigma;
  double eps = 1.0;
  double V = std::numeric_limits<double>::infinity();
  double V_prev = std::numeric_limits<double>::infinity();
  double E = std::numeric_limits<double>::infinity();
  std::vector<double> V_history;
  PrimalDualTriple current;
  double elapsed_s = 0.0;
  Index inner_iterations = 0;
  Index gradient_evaluations = 0;
};

struct AlmResult {
  PrimalDualTriple triple;
  AlmStatus status = AlmStatus::iteration_cap;
  double mu_final = 0.0;
  std::vector<AlmHistoryRow> history;
  Index inner_iterations = 0;
  Index gradient_evaluations = 0;
  Index factorizations = 0;
  double elapsed_s = 0.0;
};

struct AlmInit {
  VectorXd x0;
  VectorXd y0;
  VectorXd z0;  ///< must lie in C
};

/// Componentwise clamp to [-y_max, y_max].
VectorXd safeguard(const VectorXd& y, double y_max);

/// y_hat + A x - z
VectorXd dual_update(const VectorXd& y_hat, const SparseMatrix& A, const VectorXd& x,
                     const VectorXd& z);

/// Penalty/tolerance update after V has been set for iteration k. Advances k
/// and shifts V into V_prev. `force_penalty` takes the penalty branch
/// regardless of V (used when the inner solver stalls).
AlmState update_schedule(const AlmState& state, const AlmOptions& opts, bool force_penalty = false);

/// Exit decision for the current state; nullopt means keep iterating.
/// `P` is the problem the iterates live in (equalities folded in unless the
/// formulation keeps them hard).
std::optional<AlmStatus> classify_termination(const AlmState& state, const AlmOptions& opts,
                                              const GeoProblem& P);

AlmResult alm_solve(const GeoProblem& P, const AlmOptions& opts, const AlmInit& init);

}  // namespace geoqp
