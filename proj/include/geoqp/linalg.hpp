#pragma once

// Dense symmetric factorizations and the linear systems behind the marginal map.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "geoqp/problem.hpp"

namespace geoqp {

enum class FactorKind { spd, symmetric_indefinite };

/// Identifies the data a factorization was computed from.
struct Fingerprint {
  double mu = 0.0;
  double rho = 0.0;
  std::uint64_t problem_id = 0;

  bool operator==(const Fingerprint&) const = default;
};

class FactorizationError : public std::runtime_error {
public:
  FactorizationError(const std::string& what, Index pivot)
      : std::runtime_error(what), pivot_(pivot) {}
  Index pivot() const { return pivot_; }

private:
  Index pivot_;
};

/// Cholesky (spd) or Bunch-Kaufman LDL^T (symmetric_indefinite) factor of a
/// dense symmetric matrix, or a sparse LU factor of a sparse symmetric
/// indefinite matrix. Immutable once built; solves are reentrant and
/// bit-reproducible.
class Factorization {
public:
  Index dim() const { return dim_; }
  FactorKind kind() const { return kind_; }
  const Fingerprint& fingerprint() const { return fingerprint_; }

  bool is_sparse() const { return sparse_ != nullptr; }

  VectorXd solve(const VectorXd& b) const;
  void solve_inplace(VectorXd& b) const;
  /// Solves for all columns of B at once.
  void solve_inplace(MatrixXd& B) const;

private:
  struct SparseBackend;
  friend Factorization factorize(const MatrixXd& M, FactorKind kind, Fingerprint fingerprint);
  friend Factorization factorize_sparse(const SparseMatrix& M, Fingerprint fingerprint);

  Index dim_ = 0;
  FactorKind kind_ = FactorKind::spd;
  Fingerprint fingerprint_;
  MatrixXd factor_;
  std::vector<int> ipiv_;
  std::shared_ptr<const SparseBackend> sparse_;
};

/// Throws FactorizationError when a pivot falls below 1e-14 * max|M_ij|.
Factorization factorize(const MatrixXd& M, FactorKind kind, Fingerprint fingerprint = {});

/// Sparse LU with COLAMD ordering and partial pivoting for a symmetric
/// indefinite sparse matrix. Throws FactorizationError when the factor is
/// singular or a probe solve loses more than 1e-8 relative accuracy.
Factorization factorize_sparse(const SparseMatrix& M, Fingerprint fingerprint = {});

/// mu Q + rho I + A^T A
MatrixXd build_condensed_spd(const GeoProblem& P, double mu, double rho);

/// [[mu Q + rho I, A^T, A_eq^T], [A, -I, 0], [A_eq, 0, 0]]; the last block row and
/// column are present only when P has equality constraints.
MatrixXd build_lifted_kkt(const GeoProblem& P, double mu, double rho);
SparseMatrix build_lifted_kkt_sparse(const GeoProblem& P, double mu, double rho);

/// Power-iteration estimate of the spectral norm; never exceeds the true norm
/// (up to rounding).
double operator_norm_estimate(const MatrixXd& A, int iters);
double operator_norm_estimate(const SparseMatrix& A, int iters);

using LinearMap = std::function<VectorXd(const VectorXd&)>;

/// Same estimate for an operator R^cols -> R^rows given with its adjoint.
double operator_norm_estimate(const LinearMap& forward, const LinearMap& adjoint, Index cols,
                              int iters);

}  // namespace geoqp
