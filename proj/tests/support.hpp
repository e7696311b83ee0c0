#pragma once

// Independent oracles and instance generators shared by the unit and
// acceptance tests.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "geoqp/geometry.hpp"
#include "geoqp/problem.hpp"

namespace geoqp::testing {

using Membership = std::function<bool(double, double)>;

inline bool in_cc(double a, double b) { return a >= 0 && b >= 0 && a * b == 0; }
inline bool in_sc(double a, double b) { return a * b == 0; }
inline bool in_vc(double a, double b) { return a >= 0 && a * b >= 0; }
inline bool in_eoc(double a, double b) { return a <= 0 || b >= 0; }
inline bool in_afti_u(double a, double b) {
  return (std::abs(a) <= 25 && b == 0) || (a == 0 && std::abs(b) <= 25);
}

/// Feasible points of the 401x401 grid {(i-200)/20} on [-10,10]^2.
inline std::vector<Eigen::Vector2d> feasible_grid(const Membership& in) {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 400; ++j) {
      const double a = (i - 200) / 20.0, b = (j - 200) / 20.0;
      if (in(a, b)) pts.emplace_back(a, b);
    }
  return pts;
}

inline double grid_distance(const std::vector<Eigen::Vector2d>& pts, const Eigen::Vector2d& v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (p - v).squaredNorm());
  return std::sqrt(best);
}

inline SparseMatrix to_sparse(const MatrixXd& M) { return M.sparseView(); }

inline MatrixXd random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g;
  MatrixXd M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

inline VectorXd random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> g;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// PSD cost with a rank-deficient part, so that only mu Q + rho I is invertible.
inline QuadraticCost random_cost(std::mt19937_64& rng, Index n, Index rank) {
  const MatrixXd F = random_matrix(rng, rank, n);
  const MatrixXd Q = F.transpose() * F;
  return QuadraticCost::symmetrized(to_sparse(Q), random_vector(rng, n));
}

/// Random nonconvex instance: a mix of CC, box and free rows, optionally with
/// full-row-rank equalities.
inline GeoProblem random_problem(std::mt19937_64& rng, Index n, Index pairs, Index p) {
  GeoProblem P;
  P.cost = random_cost(rng, n, std::max<Index>(1, n / 2));
  const Index m = 2 * pairs + 1;
  P.A = to_sparse(random_matrix(rng, m, n));
  std::vector<ConstraintSet> blocks(pairs, ConstraintSet::complementarity());
  blocks.push_back(ConstraintSet::box(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0)));
  P.C = ConstraintSet::product(blocks);
  if (p > 0) {
    P.A_eq = to_sparse(random_matrix(rng, p, n));
    P.b_eq = random_vector(rng, p);
  }
  return P;
}

}  // namespace geoqp::testing
