#pragma once

// Projection-based solvers for  minimize phi(w)  subject to  w in W.

#include <Eigen/Dense>

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace geoqp {

using Eigen::Index;
using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

struct InnerProblem {
  Index dim = 0;
  /// Returns phi(w) and writes grad phi(w); must be deterministic.
  std::function<double(const VectorXd& w, VectorXd& grad)> evaluate;
  /// Overwrites w with a projection onto W; must be idempotent.
  std::function<void(Eigen::Ref<VectorXd> w)> project;
};

enum class Subsolver { nmpg, panoc };
enum class InnerStatus { converged, iteration_cap, stalled, time_limit };

std::string to_string(Subsolver s);
std::string to_string(InnerStatus s);

struct InnerOptions {
  Index max_iterations = 50000;
  int window = 10;           ///< nonmonotone memory
  double armijo = 1e-4;
  int max_backtracks = 50;
  int lbfgs_memory = 10;
  int tau_halvings = 20;     ///< tau floor is 2^-tau_halvings
  double gamma_min = 1e-10;
  double gamma_max = 1e10;
  std::optional<Clock::time_point> deadline;
  /// Called with every accepted iterate and its value.
  std::function<void(const VectorXd& w, double phi)> on_accept;
};

struct InnerResult {
  VectorXd w_star;
  double residual = std::numeric_limits<double>::infinity();
  Index iterations = 0;
  Index gradient_evaluations = 0;
  InnerStatus status = InnerStatus::iteration_cap;
  /// w_star == pg_step(certificate_base, certificate_gamma); re-evaluating
  /// stationarity_residual there reproduces `residual`.
  VectorXd certificate_base;
  double certificate_gamma = 0.0;
  std::string diagnostic;
};

/// proj_W(w - gamma grad phi(w))
VectorXd pg_step(const InnerProblem& ip, const VectorXd& w, double gamma);

/// ||(w - wbar)/gamma + grad phi(wbar) - grad phi(w)|| with wbar = pg_step(w, gamma).
/// Bounds dist(0, grad phi(wbar) + N_W(wbar)).
double stationarity_residual(const InnerProblem& ip, const VectorXd& w, double gamma);

/// Barzilai-Borwein step <s,s>/<s,v>, falling back to gamma_prev on
/// nonpositive curvature, clipped to [gamma_min, gamma_max].
double spectral_stepsize(const VectorXd& s, const VectorXd& v, double gamma_prev,
                         double gamma_min = 1e-10, double gamma_max = 1e10);

/// Nonmonotone projected gradient with spectral stepsize.
InnerResult nmpg_solve(const InnerProblem& ip, const VectorXd& w0, double eps,
                       const InnerOptions& opts = {});

/// Projected gradient accelerated by L-BFGS steps on the fixed-point residual,
/// with the same nonmonotone acceptance test as nmpg_solve.
InnerResult panoc_solve(const InnerProblem& ip, const VectorXd& w0, double eps,
                        const InnerOptions& opts = {});

InnerResult inner_solve(Subsolver which, const InnerProblem& ip, const VectorXd& w0, double eps,
                        const InnerOptions& opts = {});

}  // namespace geoqp
