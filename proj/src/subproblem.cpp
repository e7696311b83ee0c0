#include "geoqp/subproblem.hpp"

#include <stdexcept>

namespace geoqp {

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::extended: return "extended";
    case Formulation::condensed_soft: return "condensed-soft";
    case Formulation::condensed_hard: return "condensed-hard";
  }
  return "unknown";
}

namespace {

void check_sigma(const PenaltyPair& s) {
  if (!(s.rho > 0.0) || !(s.mu > 0.0)) {
    throw std::invalid_argument("penalty pair: rho and mu must be strictly positive");
  }
}

}  // namespace

Subproblem::Subproblem(const GeoProblem& P, Formulation formulation, PenaltyPair sigma,
                       std::uint64_t problem_id)
    : formulation_(formulation), sigma_(sigma), problem_id_(problem_id) {
  check_sigma(sigma);
  // Without equality rows the hard variant coincides with the soft one.
  if (formulation == Formulation::condensed_hard) {
    problem_ = P;
  } else {
    problem_ = relax_equalities(P);
  }
  x_hat_ = VectorXd::Zero(problem_.n());
  y_hat_ = VectorXd::Zero(problem_.m());
  refresh_rhs();
}

void Subproblem::set_estimates(VectorXd x_hat, VectorXd y_hat) {
  if (x_hat.size() != problem_.n() || y_hat.size() != problem_.m()) {
    throw std::invalid_argument("set_estimates: dimension mismatch");
  }
  x_hat_ = std::move(x_hat);
  y_hat_ = std::move(y_hat);
  refresh_rhs();
}

void Subproblem::invalidate_cache(PenaltyPair sigma) {
  check_sigma(sigma);
  if (sigma == sigma_) return;
  sigma_ = sigma;
  factor_.reset();
  refresh_rhs();
}

void Subproblem::refresh_rhs() {
  rhs_x_ = sigma_.rho * x_hat_ - sigma_.mu * problem_.cost.q - problem_.A.transpose() * y_hat_;
}

double Subproblem::al_value(const VectorXd& x, const VectorXd& z) const {
  const VectorXd r = problem_.A * x - z;
  return sigma_.mu * eval_cost(problem_.cost, x) + 0.5 * sigma_.rho * (x - x_hat_).squaredNorm() +
         y_hat_.dot(r) + 0.5 * r.squaredNorm();
}

double Subproblem::al_value_and_gradient(const VectorXd& x, const VectorXd& z, VectorXd& grad_x,
                                         VectorXd& grad_z) const {
  if (x.size() != problem_.n() || z.size() != problem_.m()) {
    throw std::invalid_argument("al_value_and_gradient: dimension mismatch");
  }
  const VectorXd r = problem_.A * x - z;
  const VectorXd Qx = problem_.cost.Q * x;
  const VectorXd shifted = r + y_hat_;
  grad_x = sigma_.mu * (Qx + problem_.cost.q) + sigma_.rho * (x - x_hat_) +
           problem_.A.transpose() * shifted;
  grad_z = -shifted;
  return sigma_.mu * (0.5 * x.dot(Qx) + problem_.cost.q.dot(x)) +
         0.5 * sigma_.rho * (x - x_hat_).squaredNorm() + y_hat_.dot(r) + 0.5 * r.squaredNorm();
}

void Subproblem::project_extended(Eigen::Ref<VectorXd> w) const {
  problem_.C.project_inplace(w.tail(problem_.m()));
}

void Subproblem::ensure_factorization() {
  if (factor_) return;
  const SparseMatrix K = build_lifted_kkt_sparse(problem_, sigma_.mu, sigma_.rho);
  factor_ = factorize_sparse(K, Fingerprint{sigma_.mu, sigma_.rho, problem_id_});
  ++factorizations_;
}

MarginalPoint Subproblem::marginal_point(const VectorXd& z) {
  if (!condensed()) throw std::logic_error("marginal_point: extended formulation");
  const Index n = problem_.n(), m = problem_.m(), p = problem_.p();
  if (z.size() != m) throw std::invalid_argument("marginal_point: dimension mismatch");
  ensure_factorization();
  VectorXd rhs(n + m + p);
  rhs.head(n) = rhs_x_;
  rhs.segment(n, m) = z;
  if (p > 0) rhs.tail(p) = *problem_.b_eq;
  factor_->solve_inplace(rhs);
  MarginalPoint out;
  out.x = rhs.head(n);
  out.lambda = rhs.segment(n, m);
  out.lambda_eq = rhs.tail(p);
  return out;
}

VectorXd Subproblem::marginal_x(const VectorXd& z) { return marginal_point(z).x; }

double Subproblem::marginal_value_and_gradient(const VectorXd& z, VectorXd& grad) {
  const VectorXd x = marginal_point(z).x;
  const VectorXd Ax = problem_.A * x;
  grad = z - Ax - y_hat_;
  const VectorXd r = Ax - z;
  return sigma_.mu * eval_cost(problem_.cost, x) + 0.5 * sigma_.rho * (x - x_hat_).squaredNorm() +
         y_hat_.dot(r) + 0.5 * r.squaredNorm();
}

Index Subproblem::inner_dim() const {
  return condensed() ? problem_.m() : problem_.n() + problem_.m();
}

VectorXd Subproblem::pack(const VectorXd& x, const VectorXd& z) const {
  if (condensed()) return z;
  VectorXd w(problem_.n() + problem_.m());
  w << x, z;
  return w;
}

InnerProblem Subproblem::inner_problem() {
  InnerProblem ip;
  ip.dim = inner_dim();
  if (condensed()) {
    ip.evaluate = [this](const VectorXd& z, VectorXd& grad) {
      return marginal_value_and_gradient(z, grad);
    };
    ip.project = [this](Eigen::Ref<VectorXd> z) { problem_.C.project_inplace(z); };
  } else {
    const Index n = problem_.n(), m = problem_.m();
    ip.evaluate = [this, n, m](const VectorXd& w, VectorXd& grad) {
      VectorXd gx, gz;
      const double v = al_value_and_gradient(w.head(n), w.tail(m), gx, gz);
      grad.resize(n + m);
      grad << gx, gz;
      return v;
    };
    ip.project = [this](Eigen::Ref<VectorXd> w) { project_extended(w); };
  }
  return ip;
}

}  // namespace geoqp
