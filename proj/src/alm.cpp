#include "geoqp/alm.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace geoqp {

std::string to_string(AlmStatus s) {
  switch (s) {
    case AlmStatus::solved: return "solved";
    case AlmStatus::infeasible_stationary: return "infeasible-stationary";
    case AlmStatus::time_limit: return "time-limit";
    case AlmStatus::iteration_cap: return "iteration-cap";
  }
  return "unknown";
}

int exit_code(AlmStatus s) {
  switch (s) {
    case AlmStatus::solved: return 0;
    case AlmStatus::infeasible_stationary: return 2;
    case AlmStatus::time_limit: return 3;
    case AlmStatus::iteration_cap: return 4;
  }
  return 1;
}

void AlmOptions::check() const {
  auto need = [](bool c, const char* what) {
    if (!c) throw std::invalid_argument(std::string("AlmOptions: ") + what);
  };
  need(eps_d > 0 && eps_p > 0, "eps_d and eps_p must be positive");
  need(kappa_V >= 0 && kappa_V < 1, "kappa_V must lie in [0,1)");
  need(kappa_eps > 0 && kappa_eps < 1, "kappa_eps must lie in (0,1)");
  need(kappa_mu > 0 && kappa_mu < 1, "kappa_mu must lie in (0,1)");
  need(kappa_rho > 0 && kappa_rho <= 1, "kappa_rho must lie in (0,1]");
  need(eps_1 > 0 && mu_1 > 0 && rho_1 > 0, "eps_1, mu_1, rho_1 must be positive");
  need(y_max > 0, "y_max must be positive");
  need(max_outer >= 1, "max_outer must be at least 1");
  need(stagnation_window >= 1, "stagnation_window must be at least 1");
}

VectorXd safeguard(const VectorXd& y, double y_max) {
  return y.cwiseMax(-y_max).cwiseMin(y_max);
}

VectorXd dual_update(const VectorXd& y_hat, const SparseMatrix& A, const VectorXd& x,
                     const VectorXd& z) {
  if (A.rows() != y_hat.size() || A.cols() != x.size() || z.size() != y_hat.size()) {
    throw std::invalid_argument("dual_update: dimension mismatch");
  }
  VectorXd y = A * x;
  y += y_hat;
  y -= z;
  return y;
}

AlmState update_schedule(const AlmState& state, const AlmOptions& opts, bool force_penalty) {
  AlmState next = state;
  if (!force_penalty && state.V <= std::max(opts.eps_p, opts.kappa_V * state.V_prev)) {
    next.eps = opts.kappa_eps * std::max(opts.eps_d, state.eps);
  } else {
    next.sigma.rho = opts.kappa_rho * state.sigma.rho;
    next.sigma.mu = opts.kappa_mu * state.sigma.mu;
  }
  next.V_prev = state.V;
  next.k = state.k + 1;
  return next;
}

namespace {

bool stagnant(const AlmState& s, const AlmOptions& opts) {
  const auto w = static_cast<std::size_t>(opts.stagnation_window);
  if (s.V_history.size() <= w) return false;
  const double now = s.V_history.back();
  const double before = s.V_history[s.V_history.size() - 1 - w];
  return now >= (1.0 - opts.stagnation_decrease) * before;
}

// Stationarity of dist^2(Ax) on {A_eq x = b_eq}, tested on the direction of
// the residual: the component of A^T r outside range(A_eq^T) must be small
// relative to |r|. An absolute test on A^T r passes trivially once |r| itself
// is near the tolerance.
bool infeasible_stationary_on(const GeoProblem& P, const VectorXd& x, double tol) {
  const VectorXd Ax = P.A * x;
  const VectorXd r = Ax - P.C.project(Ax);
  const double dist = r.norm();
  if (dist <= tol) return false;
  VectorXd g = P.A.transpose() * r;
  if (P.has_equalities()) {
    const MatrixXd AeqT = MatrixXd(P.A_eq->transpose());
    g -= AeqT * AeqT.colPivHouseholderQr().solve(g);
  }
  return g.norm() <= tol * dist;
}

}  // namespace

std::optional<AlmStatus> classify_termination(const AlmState& state, const AlmOptions& opts,
                                              const GeoProblem& P) {
  if (state.E <= opts.eps_d && state.V <= opts.eps_p) return AlmStatus::solved;
  if (state.sigma.mu < opts.mu_floor && state.V > opts.eps_p && stagnant(state, opts) &&
      infeasible_stationary_on(P, state.current.x, opts.eps_d)) {
    return AlmStatus::infeasible_stationary;
  }
  if (state.elapsed_s >= opts.time_limit_s) return AlmStatus::time_limit;
  if (state.k >= opts.max_outer) return AlmStatus::iteration_cap;
  return std::nullopt;
}

AlmResult alm_solve(const GeoProblem& P, const AlmOptions& opts, const AlmInit& init) {
  opts.check();
  if (init.x0.size() != P.n() || init.y0.size() != P.m() || init.z0.size() != P.m()) {
    throw std::invalid_argument("alm_solve: initial point has wrong dimensions");
  }
  const auto t_start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t_start).count(); };

  const Formulation form = opts.formulation;
  Subproblem sp(P, form, PenaltyPair{opts.rho_1, opts.mu_1});
  const GeoProblem& W = sp.problem();
  const Index n = P.n(), m = P.m(), p = P.p(), mw = W.m();
  const bool hard = form == Formulation::condensed_hard && p > 0;

  AlmState st;
  st.sigma = PenaltyPair{opts.rho_1, opts.mu_1};
  st.eps = opts.eps_1;
  st.current.x = init.x0;
  st.current.z = VectorXd(mw);
  st.current.y = VectorXd::Zero(mw);
  st.current.z.head(m) = init.z0;
  st.current.y.head(m) = init.y0;
  if (!hard && p > 0) st.current.z.tail(p) = *P.b_eq;
  VectorXd y_eq = VectorXd::Zero(p);

  InnerOptions inner = opts.inner;
  inner.deadline = t_start + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(opts.time_limit_s));

  AlmResult result;
  AlmStatus status = AlmStatus::iteration_cap;
  for (;;) {
    const VectorXd x_hat = st.current.x;
    const VectorXd z_hat = st.current.z;
    const VectorXd y_hat = safeguard(st.current.y, opts.y_max);
    sp.invalidate_cache(st.sigma);
    sp.set_estimates(x_hat, y_hat);

    const InnerProblem ip = sp.inner_problem();
    const InnerResult ir = inner_solve(opts.subsolver, ip, sp.pack(x_hat, z_hat), st.eps, inner);

    VectorXd x, z;
    if (sp.condensed()) {
      z = ir.w_star;
      MarginalPoint mp = sp.marginal_point(z);
      x = std::move(mp.x);
      if (hard) y_eq = std::move(mp.lambda_eq);
    } else {
      x = ir.w_star.head(n);
      z = ir.w_star.tail(mw);
    }
    VectorXd y = dual_update(y_hat, W.A, x, z);

    VectorXd dual = st.sigma.mu * eval_cost_gradient(W.cost, x) + W.A.transpose() * y;
    double V = mw > 0 ? (W.A * x - z).lpNorm<Eigen::Infinity>() : 0.0;
    if (hard) {
      dual += W.A_eq->transpose() * y_eq;
      V = std::max(V, (*W.A_eq * x - *W.b_eq).lpNorm<Eigen::Infinity>());
    }
    st.E = std::max(dual.norm(), st.eps);
    st.V = V;
    st.V_history.push_back(V);
    st.current = PrimalDualTriple{std::move(x), std::move(z), std::move(y), std::nullopt};
    st.inner_iterations += ir.iterations;
    st.gradient_evaluations += ir.gradient_evaluations;
    st.elapsed_s = elapsed();

    result.history.push_back(AlmHistoryRow{st.k, st.sigma.rho, st.sigma.mu, st.eps, st.E, st.V,
                                           ir.iterations, ir.gradient_evaluations, st.elapsed_s,
                                           ir.status});

    std::optional<AlmStatus> verdict = classify_termination(st, opts, W);
    if (!verdict && ir.status == InnerStatus::time_limit) verdict = AlmStatus::time_limit;
    if (verdict) {
      status = *verdict;
      break;
    }
    st = update_schedule(st, opts, ir.status == InnerStatus::stalled);
  }

  result.status = status;
  result.mu_final = st.sigma.mu;
  result.inner_iterations = st.inner_iterations;
  result.gradient_evaluations = st.gradient_evaluations;
  result.factorizations = sp.factorization_count();
  result.elapsed_s = elapsed();
  result.triple.x = st.current.x;
  result.triple.z = st.current.z.head(m);
  result.triple.y = st.current.y.head(m);
  if (p > 0) result.triple.y_eq = hard ? y_eq : VectorXd(st.current.y.tail(p));
  return result;
}

}  // namespace geoqp
