#include "geoqp/linalg.hpp"

#include <Eigen/SparseLU>
#include <lapacke.h>

#include <cmath>
#include <random>
#include <string>

namespace geoqp {

namespace {

void check_pivot(double value, double tol, Index index, FactorKind kind) {
  if (!(std::abs(value) > tol)) {
    throw FactorizationError(std::string(kind == FactorKind::spd ? "Cholesky" : "LDL^T") +
                                 " factorization: numerically singular pivot at index " +
                                 std::to_string(index),
                             index);
  }
}

}  // namespace

struct Factorization::SparseBackend {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

Factorization factorize(const MatrixXd& M, FactorKind kind, Fingerprint fingerprint) {
  if (M.rows() != M.cols()) throw std::invalid_argument("factorize: matrix is not square");
  Factorization f;
  f.dim_ = M.rows();
  f.kind_ = kind;
  f.fingerprint_ = fingerprint;
  f.factor_ = M;
  const lapack_int n = static_cast<lapack_int>(M.rows());
  if (n == 0) return f;
  const double tol = 1e-14 * M.cwiseAbs().maxCoeff();

  if (kind == FactorKind::spd) {
    const lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, f.factor_.data(), n);
    if (info > 0) {
      throw FactorizationError("Cholesky factorization: leading minor " + std::to_string(info) +
                                   " is not positive definite",
                               info - 1);
    }
    if (info < 0) throw std::runtime_error("LAPACKE_dpotrf: invalid argument");
    for (Index i = 0; i < f.dim_; ++i) {
      const double l = f.factor_(i, i);
      check_pivot(l * l, tol, i, kind);
    }
    return f;
  }

  f.ipiv_.assign(static_cast<std::size_t>(n), 0);
  const lapack_int info =
      LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, f.factor_.data(), n, f.ipiv_.data());
  if (info < 0) throw std::runtime_error("LAPACKE_dsytrf: invalid argument");
  if (info > 0) {
    throw FactorizationError("LDL^T factorization: exactly singular pivot at index " +
                                 std::to_string(info - 1),
                             info - 1);
  }
  // Inspect the 1x1 and 2x2 diagonal blocks of D.
  for (Index k = 0; k < f.dim_;) {
    if (f.ipiv_[static_cast<std::size_t>(k)] > 0) {
      check_pivot(f.factor_(k, k), tol, k, kind);
      k += 1;
    } else {
      const double a = f.factor_(k, k), b = f.factor_(k + 1, k), c = f.factor_(k + 1, k + 1);
      const double mean = 0.5 * (a + c);
      const double radius = std::hypot(0.5 * (a - c), b);
      const double det = a * c - b * b;
      const double min_eig = std::abs(det) / (std::abs(mean) + radius);
      check_pivot(min_eig, tol, k, kind);
      k += 2;
    }
  }
  return f;
}

Factorization factorize_sparse(const SparseMatrix& M, Fingerprint fingerprint) {
  if (M.rows() != M.cols()) throw std::invalid_argument("factorize: matrix is not square");
  Factorization f;
  f.dim_ = M.rows();
  f.kind_ = FactorKind::symmetric_indefinite;
  f.fingerprint_ = fingerprint;
  if (f.dim_ == 0) return f;
  auto backend = std::make_shared<Factorization::SparseBackend>();
  SparseMatrix C = M;
  C.makeCompressed();
  backend->lu.analyzePattern(C);
  backend->lu.factorize(C);
  if (backend->lu.info() != Eigen::Success) {
    throw FactorizationError("sparse LU factorization failed: " + backend->lu.lastErrorMessage(),
                             -1);
  }
  // Probe solve against a fixed right-hand side to catch near-singular factors.
  VectorXd b(f.dim_);
  for (Index i = 0; i < f.dim_; ++i) b[i] = 1.0 + static_cast<double>(i % 7) / 7.0;
  const VectorXd x = backend->lu.solve(b);
  double scale = 0.0;
  for (Index k = 0; k < C.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(C, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  const double residual = (C * x - b).norm();
  if (!x.allFinite() || residual > 1e-8 * (scale * x.norm() + b.norm())) {
    throw FactorizationError("sparse LU factorization: matrix is numerically singular", -1);
  }
  f.sparse_ = std::move(backend);
  return f;
}

void Factorization::solve_inplace(VectorXd& b) const {
  if (b.size() != dim_) {
    throw std::invalid_argument("solve: rhs has size " + std::to_string(b.size()) +
                                ", expected " + std::to_string(dim_));
  }
  if (dim_ == 0) return;
  if (sparse_) {
    b = sparse_->lu.solve(b).eval();
    return;
  }
  const lapack_int n = static_cast<lapack_int>(dim_);
  lapack_int info = 0;
  if (kind_ == FactorKind::spd) {
    info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, 1, factor_.data(), n, b.data(), n);
  } else {
    info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, factor_.data(), n, ipiv_.data(), b.data(), n);
  }
  if (info != 0) throw std::runtime_error("LAPACK triangular solve failed");
}

void Factorization::solve_inplace(MatrixXd& B) const {
  if (B.rows() != dim_) {
    throw std::invalid_argument("solve: rhs has " + std::to_string(B.rows()) + " rows, expected " +
                                std::to_string(dim_));
  }
  if (dim_ == 0 || B.cols() == 0) return;
  if (sparse_) {
    B = sparse_->lu.solve(B).eval();
    return;
  }
  const lapack_int n = static_cast<lapack_int>(dim_);
  const lapack_int nrhs = static_cast<lapack_int>(B.cols());
  lapack_int info = 0;
  if (kind_ == FactorKind::spd) {
    info = LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', n, nrhs, factor_.data(), n, B.data(), n);
  } else {
    info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, nrhs, factor_.data(), n, ipiv_.data(), B.data(),
                          n);
  }
  if (info != 0) throw std::runtime_error("LAPACK triangular solve failed");
}

VectorXd Factorization::solve(const VectorXd& b) const {
  VectorXd x = b;
  solve_inplace(x);
  return x;
}

MatrixXd build_condensed_spd(const GeoProblem& P, double mu, double rho) {
  const MatrixXd A = MatrixXd(P.A);
  MatrixXd M = mu * MatrixXd(P.cost.Q);
  M.diagonal().array() += rho;
  M.noalias() += A.transpose() * A;
  return M;
}

SparseMatrix build_lifted_kkt_sparse(const GeoProblem& P, double mu, double rho) {
  const Index n = P.n(), m = P.m(), p = P.p();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(P.cost.Q.nonZeros() + n + 2 * P.A.nonZeros() + m +
                                     (p > 0 ? 2 * P.A_eq->nonZeros() : 0)));
  for (Index k = 0; k < P.cost.Q.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(P.cost.Q, k); it; ++it)
      t.emplace_back(it.row(), it.col(), mu * it.value());
  for (Index i = 0; i < n; ++i) t.emplace_back(i, i, rho);
  for (Index k = 0; k < P.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(P.A, k); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  for (Index i = 0; i < m; ++i) t.emplace_back(n + i, n + i, -1.0);
  if (p > 0) {
    for (Index k = 0; k < P.A_eq->outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(*P.A_eq, k); it; ++it) {
        t.emplace_back(n + m + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), n + m + it.row(), it.value());
      }
  }
  SparseMatrix K(n + m + p, n + m + p);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  return K;
}

MatrixXd build_lifted_kkt(const GeoProblem& P, double mu, double rho) {
  return MatrixXd(build_lifted_kkt_sparse(P, mu, rho));
}

double operator_norm_estimate(const LinearMap& forward, const LinearMap& adjoint, Index cols,
                              int iters) {
  if (iters < 1) throw std::invalid_argument("operator_norm_estimate: iters must be >= 1");
  if (cols == 0) return 0.0;
  std::mt19937_64 gen(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  VectorXd v(cols);
  for (Index i = 0; i < cols; ++i) v[i] = normal(gen);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iters; ++it) {
    const VectorXd Av = forward(v);
    // ||A v|| with ||v|| = 1 is a lower bound on ||A||.
    estimate = std::max(estimate, Av.norm());
    VectorXd w = adjoint(Av);
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
  }
  return estimate;
}

double operator_norm_estimate(const MatrixXd& A, int iters) {
  return operator_norm_estimate([&](const VectorXd& v) -> VectorXd { return A * v; },
                                [&](const VectorXd& v) -> VectorXd { return A.transpose() * v; },
                                A.cols(), iters);
}

double operator_norm_estimate(const SparseMatrix& A, int iters) {
  return operator_norm_estimate([&](const VectorXd& v) -> VectorXd { return A * v; },
                                [&](const VectorXd& v) -> VectorXd { return A.transpose() * v; },
                                A.cols(), iters);
}

}  // namespace geoqp
