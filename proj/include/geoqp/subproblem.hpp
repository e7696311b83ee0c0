#pragma once

// Augmented Lagrangian subproblems in the three formulations:
//   extended        minimize over (x, z) in R^n x C
//   condensed-soft  minimize the marginal function M(z) over C, equalities relaxed
//   condensed-hard  minimize M(z) over C, equalities kept inside the x-minimization

#include <cstdint>
#include <optional>
#include <string>

#include "geoqp/inner_solvers.hpp"
#include "geoqp/linalg.hpp"
#include "geoqp/problem.hpp"

namespace geoqp {

enum class Formulation { extended, condensed_soft, condensed_hard };

std::string to_string(Formulation f);

/// sigma = (rho, mu): proximal weight and cost scaling, both > 0.
struct PenaltyPair {
  double rho = 1e-6;
  double mu = 1.0;

  bool operator==(const PenaltyPair&) const = default;
};

/// Output of one lifted KKT solve for a given z.
struct MarginalPoint {
  VectorXd x;
  VectorXd lambda;     ///< A x - z
  VectorXd lambda_eq;  ///< equality multipliers (condensed-hard only)
};

/// One AL subproblem instance. Holds its own copy of the working problem:
/// for extended and condensed-soft that is relax_equalities(P), so A_eq rows
/// become relaxed rows with a translated zero block in C.
///
/// Not thread-safe: the cached factorization is mutated lazily.
class Subproblem {
public:
  Subproblem(const GeoProblem& P, Formulation formulation, PenaltyPair sigma,
             std::uint64_t problem_id = 0);

  Formulation formulation() const { return formulation_; }
  bool condensed() const { return formulation_ != Formulation::extended; }
  const GeoProblem& problem() const { return problem_; }
  const PenaltyPair& sigma() const { return sigma_; }
  const VectorXd& x_hat() const { return x_hat_; }
  const VectorXd& y_hat() const { return y_hat_; }

  void set_estimates(VectorXd x_hat, VectorXd y_hat);

  /// Drops the cached factorization iff sigma differs from the current pair.
  void invalidate_cache(PenaltyPair sigma);
  bool has_cached_factorization() const { return factor_.has_value(); }
  Index factorization_count() const { return factorizations_; }

  /// mu f(x) + rho/2 ||x - x_hat||^2 + <y_hat, Ax - z> + 1/2 ||Ax - z||^2
  double al_value(const VectorXd& x, const VectorXd& z) const;
  double al_value_and_gradient(const VectorXd& x, const VectorXd& z, VectorXd& grad_x,
                               VectorXd& grad_z) const;
  /// w = (x, z): z replaced by proj_C(z), x untouched.
  void project_extended(Eigen::Ref<VectorXd> w) const;

  /// Direct solve of the lifted KKT system for this z.
  MarginalPoint marginal_point(const VectorXd& z);
  VectorXd marginal_x(const VectorXd& z);
  /// M(z) = L(X(z), z); gradient z - A X(z) - y_hat. One solve per call.
  double marginal_value_and_gradient(const VectorXd& z, VectorXd& grad);

  /// The subproblem in the generic form consumed by the inner solvers.
  /// The returned object refers to *this.
  InnerProblem inner_problem();
  Index inner_dim() const;

  /// Warm start vector for the inner solver from (x_hat, z_hat).
  VectorXd pack(const VectorXd& x, const VectorXd& z) const;

private:
  void ensure_factorization();
  void refresh_rhs();

  GeoProblem problem_;
  Formulation formulation_;
  PenaltyPair sigma_;
  std::uint64_t problem_id_;
  VectorXd x_hat_, y_hat_;
  VectorXd rhs_x_;  ///< rho x_hat - mu q - A^T y_hat
  std::optional<Factorization> factor_;
  Index factorizations_ = 0;
};

}  // namespace geoqp
