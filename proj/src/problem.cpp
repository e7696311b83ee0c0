#include "geoqp/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace geoqp {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double max_abs(const SparseMatrix& M) {
  double v = 0.0;
  for (int k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) v = std::max(v, std::abs(it.value()));
  return v;
}

}  // namespace

QuadraticCost QuadraticCost::symmetrized(const SparseMatrix& Q, VectorXd q) {
  require(Q.rows() == Q.cols() && Q.rows() == q.size(), "QuadraticCost: dimension mismatch");
  SparseMatrix Qt = Q.transpose();
  SparseMatrix S = 0.5 * (Q + Qt);
  S.makeCompressed();
  return QuadraticCost{std::move(S), std::move(q)};
}

double eval_cost(const QuadraticCost& cost, const VectorXd& x) {
  require(x.size() == cost.dim() && cost.Q.rows() == cost.dim(), "eval_cost: dimension mismatch");
  return 0.5 * x.dot(cost.Q * x) + cost.q.dot(x);
}

VectorXd eval_cost_gradient(const QuadraticCost& cost, const VectorXd& x) {
  require(x.size() == cost.dim() && cost.Q.rows() == cost.dim(),
          "eval_cost_gradient: dimension mismatch");
  return cost.Q * x + cost.q;
}

StationarityReport check_stationarity(const GeoProblem& P, const PrimalDualTriple& t, double mu,
                                      double eps_d, double eps_p) {
  require(t.x.size() == P.n() && t.z.size() == P.m() && t.y.size() == P.m(),
          "check_stationarity: dimension mismatch");
  require(mu >= 0.0, "check_stationarity: mu must be nonnegative");
  VectorXd dual = mu * eval_cost_gradient(P.cost, t.x) + P.A.transpose() * t.y;
  double primal = P.m() > 0 ? (P.A * t.x - t.z).lpNorm<Eigen::Infinity>() : 0.0;
  if (P.has_equalities()) {
    if (t.y_eq) {
      require(t.y_eq->size() == P.p(), "check_stationarity: y_eq dimension mismatch");
      dual += P.A_eq->transpose() * *t.y_eq;
    }
    primal = std::max(primal, (*P.A_eq * t.x - *P.b_eq).lpNorm<Eigen::Infinity>());
  }
  StationarityReport r;
  r.dual_residual = dual.norm();
  r.primal_residual = primal;
  r.eps_d = eps_d;
  r.eps_p = eps_p;
  r.pass = r.dual_residual <= eps_d && r.primal_residual <= eps_p;
  return r;
}

bool check_infeasible_stationary(const GeoProblem& P, const VectorXd& x, double tol) {
  require(x.size() == P.n(), "check_infeasible_stationary: dimension mismatch");
  const VectorXd Ax = P.A * x;
  const VectorXd r = Ax - P.C.project(Ax);
  if (r.norm() <= tol) return false;
  return (P.A.transpose() * r).norm() <= tol;
}

ValidationReport validate(const GeoProblem& P) {
  ValidationReport rep;
  auto add = [&](const std::string& s) { rep.violations.push_back(s); };
  const Index n = P.n();
  try {
    if (P.cost.Q.rows() != n || P.cost.Q.cols() != n) {
      add("Q is " + std::to_string(P.cost.Q.rows()) + "x" + std::to_string(P.cost.Q.cols()) +
          ", expected " + std::to_string(n) + "x" + std::to_string(n));
    } else {
      SparseMatrix Qt = P.cost.Q.transpose();
      const double asym = max_abs(SparseMatrix(P.cost.Q - Qt));
      if (asym > 1e-12) {
        std::ostringstream os;
        os << "Q is not symmetric (max |Q - Q^T| = " << asym << ")";
        add(os.str());
      }
      const double shift = 1e-10 * (1.0 + max_abs(P.cost.Q));
      MatrixXd Qd = MatrixXd(P.cost.Q);
      Qd = 0.5 * (Qd + Qd.transpose()).eval();
      Qd.diagonal().array() += shift;
      Eigen::LLT<MatrixXd> llt(Qd);
      if (llt.info() != Eigen::Success) add("Q is not positive semidefinite (Cholesky probe failed)");
    }
    if (P.A.cols() != n) {
      add("A has " + std::to_string(P.A.cols()) + " columns, expected " + std::to_string(n));
    }
    if (P.C.dim() != P.A.rows()) {
      add("C has dimension " + std::to_string(P.C.dim()) + " but A has " +
          std::to_string(P.A.rows()) + " rows");
    }
    if (P.A_eq.has_value() != P.b_eq.has_value()) {
      add("A_eq and b_eq must be given together");
    } else if (P.A_eq) {
      if (P.A_eq->cols() != n) add("A_eq has wrong column count");
      if (P.A_eq->rows() != P.b_eq->size()) add("b_eq length does not match A_eq rows");
      if (P.A_eq->cols() == n && P.A_eq->rows() > 0) {
        Eigen::ColPivHouseholderQR<MatrixXd> qr(MatrixXd(P.A_eq->transpose()));
        qr.setThreshold(1e-10);
        if (qr.rank() < P.A_eq->rows()) {
          add("A_eq is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
              std::to_string(P.A_eq->rows()) + " rows)");
        }
      }
    }
    if (!P.cost.q.allFinite()) add("q has non-finite entries");
  } catch (const std::exception& e) {
    add(std::string("validation aborted: ") + e.what());
  }
  return rep;
}

GeoProblem relax_equalities(const GeoProblem& P) {
  if (!P.has_equalities()) {
    GeoProblem out = P;
    out.A_eq.reset();
    out.b_eq.reset();
    return out;
  }
  const Index m = P.m(), p = P.p(), n = P.n();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(P.A.nonZeros() + P.A_eq->nonZeros()));
  for (int k = 0; k < P.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(P.A, k); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < P.A_eq->outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(*P.A_eq, k); it; ++it)
      trip.emplace_back(m + it.row(), it.col(), it.value());
  GeoProblem out;
  out.cost = P.cost;
  out.A.resize(m + p, n);
  out.A.setFromTriplets(trip.begin(), trip.end());
  out.C = ConstraintSet::product({P.C, ConstraintSet::translate(ConstraintSet::zero(p), *P.b_eq)});
  return out;
}

}  // namespace geoqp
