#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

#include "geoqp/geometry.hpp"

namespace geoqp {

using Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// f(x) = 1/2 <x, Q x> + <q, x>, Q symmetric positive semidefinite.
struct QuadraticCost {
  SparseMatrix Q;
  VectorXd q;

  /// Stores (Q + Q^T) / 2.
  static QuadraticCost symmetrized(const SparseMatrix& Q, VectorXd q);

  Index dim() const { return q.size(); }
};

/// minimize f(x) subject to A x in C, with optional lower-level equalities
/// A_eq x = b_eq.
struct GeoProblem {
  QuadraticCost cost;
  SparseMatrix A;
  ConstraintSet C = ConstraintSet::zero(0);
  std::optional<SparseMatrix> A_eq;
  std::optional<VectorXd> b_eq;

  Index n() const { return cost.dim(); }
  Index m() const { return A.rows(); }
  Index p() const { return A_eq ? A_eq->rows() : 0; }
  bool has_equalities() const { return A_eq.has_value() && A_eq->rows() > 0; }
};

struct PrimalDualTriple {
  VectorXd x;
  VectorXd z;  ///< always a point of C
  VectorXd y;
  std::optional<VectorXd> y_eq;
};

struct StationarityReport {
  double dual_residual = 0.0;
  double primal_residual = 0.0;
  double eps_d = 0.0;
  double eps_p = 0.0;
  bool pass = false;
};

double eval_cost(const QuadraticCost& cost, const VectorXd& x);
VectorXd eval_cost_gradient(const QuadraticCost& cost, const VectorXd& x);

/// Dual residual ||mu grad f(x) + A^T y + A_eq^T y_eq||_2 and primal residual
/// max(||Ax - z||_inf, ||A_eq x - b_eq||_inf). Membership z in C and the normal-cone
/// condition on y are guaranteed by how the triple is produced and are not re-checked.
StationarityReport check_stationarity(const GeoProblem& P, const PrimalDualTriple& t, double mu,
                                      double eps_d, double eps_p);

/// dist_C(Ax) > tol and ||A^T (Ax - proj_C(Ax))|| <= tol.
bool check_infeasible_stationary(const GeoProblem& P, const VectorXd& x, double tol);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Lists every structural problem found; never throws.
ValidationReport validate(const GeoProblem& P);

/// Folds A_eq x = b_eq into the relaxed rows: A' = [A; A_eq], C' = C x {b_eq}.
GeoProblem relax_equalities(const GeoProblem& P);

}  // namespace geoqp
