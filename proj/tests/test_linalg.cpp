#include <doctest.h>

#include "geoqp/linalg.hpp"
#include "support.hpp"

using namespace geoqp;
using geoqp::testing::to_sparse;

namespace {

GeoProblem unit_problem() {
  GeoProblem P;
  P.cost = QuadraticCost::symmetrized(to_sparse(MatrixXd::Ones(1, 1)), VectorXd::Zero(1));
  P.A = to_sparse(MatrixXd::Ones(1, 1));
  P.C = ConstraintSet::free(1);
  return P;
}

}  // namespace

TEST_CASE("build_condensed_spd") {
  const GeoProblem P = unit_problem();
  CHECK(build_condensed_spd(P, 1, 1)(0, 0) == 3.0);
  GeoProblem Z;
  Z.cost = QuadraticCost::symmetrized(SparseMatrix(3, 3), VectorXd::Zero(3));
  Z.A = SparseMatrix(2, 3);
  Z.C = ConstraintSet::zero(2);
  CHECK(build_condensed_spd(Z, 5.0, 0.5) == 0.5 * MatrixXd::Identity(3, 3));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const GeoProblem R = testing::random_problem(rng, 8, 3, 0);
    const MatrixXd M = build_condensed_spd(R, 1e-3, 1e-6);
    REQUIRE(M == M.transpose());
    REQUIRE(Eigen::LLT<MatrixXd>(M).info() == Eigen::Success);
  }
}

TEST_CASE("build_lifted_kkt") {
  GeoProblem P = unit_problem();
  const MatrixXd K = build_lifted_kkt(P, 1, 1);
  CHECK(K == (MatrixXd(2, 2) << 2, 1, 1, -1).finished());
  P.A_eq = to_sparse(MatrixXd::Ones(1, 1));
  P.b_eq = VectorXd::Zero(1);
  const MatrixXd K3 = build_lifted_kkt(P, 1, 1);
  REQUIRE(K3.rows() == 3);
  CHECK(K3.row(2) == (Eigen::RowVectorXd(3) << 1, 0, 0).finished());
  CHECK(K3 == K3.transpose());
  std::mt19937_64 rng(2);
  const GeoProblem R = testing::random_problem(rng, 7, 2, 2);
  const MatrixXd KR = build_lifted_kkt(R, 0.3, 2.0);
  CHECK(KR == KR.transpose());
  CHECK(MatrixXd(build_lifted_kkt_sparse(R, 0.3, 2.0)) == KR);
}

TEST_CASE("factorize and solve examples") {
  const Factorization f = factorize(MatrixXd::Constant(1, 1, 3), FactorKind::spd);
  CHECK(f.solve(VectorXd::Constant(1, 3))[0] == doctest::Approx(1.0).epsilon(1e-15));
  const MatrixXd K = build_lifted_kkt(unit_problem(), 1, 1);
  for (const Factorization& h : {factorize(K, FactorKind::symmetric_indefinite),
                                 factorize_sparse(K.sparseView())}) {
    const VectorXd s = h.solve((VectorXd(2) << 0, 1).finished());
    CHECK(s[0] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(-2.0 / 3).epsilon(1e-14));
    CHECK(h.solve(VectorXd::Zero(2)) == VectorXd::Zero(2));
  }
  CHECK_THROWS_AS(factorize(MatrixXd::Zero(1, 1), FactorKind::spd), FactorizationError);
  CHECK_THROWS_AS(factorize(MatrixXd::Zero(1, 1), FactorKind::symmetric_indefinite),
                  FactorizationError);
  CHECK_THROWS_AS(factorize_sparse(SparseMatrix(2, 2)), FactorizationError);
  CHECK_THROWS(f.solve(VectorXd::Zero(2)));
}

TEST_CASE("solves match the dense inverse and are deterministic") {
  std::mt19937_64 rng(3);
  const MatrixXd F = testing::random_matrix(rng, 20, 20);
  const MatrixXd M = F.transpose() * F + MatrixXd::Identity(20, 20);
  const VectorXd b = testing::random_vector(rng, 20);
  const VectorXd oracle = M.inverse() * b;
  for (auto kind : {FactorKind::spd, FactorKind::symmetric_indefinite}) {
    const Factorization h = factorize(M, kind);
    const VectorXd x = h.solve(b);
    CHECK((x - oracle).norm() / oracle.norm() <= 1e-10);
    CHECK(h.solve(b) == x);
    CHECK((M * x - b).norm() <= 1e-10 * (1 + b.norm()));
  }
  const GeoProblem R = testing::random_problem(rng, 30, 8, 4);
  const MatrixXd K = build_lifted_kkt(R, 1e-2, 1e-3);
  const VectorXd c = testing::random_vector(rng, K.rows());
  const Factorization hs = factorize_sparse(build_lifted_kkt_sparse(R, 1e-2, 1e-3));
  const Factorization hd = factorize(K, FactorKind::symmetric_indefinite);
  const VectorXd xs = hs.solve(c);
  CHECK((K * xs - c).norm() <= 1e-10 * (1 + c.norm()));
  CHECK((hd.solve(c) - xs).norm() <= 1e-9 * xs.norm());
  CHECK(hs.solve(c) == xs);
  MatrixXd B(K.rows(), 2);
  B << c, 2 * c;
  hs.solve_inplace(B);
  CHECK((B.col(0) - xs).norm() <= 1e-12 * xs.norm());
}

TEST_CASE("lifted and condensed systems give the same x") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const GeoProblem R = testing::random_problem(rng, 10, 3, 0);
    const double mu = 0.5, rho = 1e-2;
    const VectorXd xh = testing::random_vector(rng, 10), yh = testing::random_vector(rng, R.m()),
                   z = testing::random_vector(rng, R.m());
    const VectorXd dense =
        factorize(build_condensed_spd(R, mu, rho), FactorKind::spd)
            .solve(rho * xh - mu * R.cost.q + R.A.transpose() * (z - yh));
    VectorXd rhs(10 + R.m());
    rhs << rho * xh - mu * R.cost.q - R.A.transpose() * yh, z;
    const VectorXd lifted = factorize_sparse(build_lifted_kkt_sparse(R, mu, rho)).solve(rhs).head(10);
    CHECK((lifted - dense).norm() <= 1e-9 * dense.norm());
  }
}

TEST_CASE("operator_norm_estimate") {
  CHECK(operator_norm_estimate(MatrixXd::Constant(1, 1, 2), 10) == doctest::Approx(2.0));
  const MatrixXd D = (VectorXd(2) << 1, 3).finished().asDiagonal();
  CHECK(std::abs(operator_norm_estimate(D, 100) - 3.0) <= 1e-8);
  CHECK(operator_norm_estimate(MatrixXd::Zero(3, 2), 10) == 0.0);
  std::mt19937_64 rng(5);
  const MatrixXd A = testing::random_matrix(rng, 12, 7);
  const double truth = Eigen::JacobiSVD<MatrixXd>(A).singularValues()[0];
  const double est = operator_norm_estimate(A, 200);
  CHECK(est <= truth * (1 + 1e-12));
  CHECK(est >= 0.99 * truth);
  CHECK(operator_norm_estimate(SparseMatrix(A.sparseView()), 200) == doctest::Approx(est));
}
