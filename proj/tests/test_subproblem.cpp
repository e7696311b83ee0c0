#include <doctest.h>

#include "geoqp/subproblem.hpp"
#include "support.hpp"

using namespace geoqp;
using geoqp::testing::to_sparse;

namespace {

GeoProblem scalar_problem(ConstraintSet C = ConstraintSet::free(1)) {
  GeoProblem P;
  P.cost = QuadraticCost::symmetrized(to_sparse(MatrixXd::Ones(1, 1)), VectorXd::Zero(1));
  P.A = to_sparse(MatrixXd::Ones(1, 1));
  P.C = std::move(C);
  return P;
}

VectorXd one(double v) { return VectorXd::Constant(1, v); }

double rel(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST_CASE("extended value and gradient examples") {
  GeoProblem Z;
  Z.cost = QuadraticCost::symmetrized(SparseMatrix(2, 2), VectorXd::Zero(2));
  Z.A = SparseMatrix(2, 2);
  Z.C = ConstraintSet::zero(2);
  Subproblem z0(Z, Formulation::extended, {1.0, 1.0});
  z0.set_estimates(VectorXd::Zero(2), VectorXd::Zero(2));
  VectorXd gx, gz;
  CHECK(z0.al_value_and_gradient(VectorXd::Zero(2), VectorXd::Zero(2), gx, gz) == 0.0);
  CHECK(gx.norm() == 0.0);
  CHECK(gz.norm() == 0.0);

  Subproblem sp(scalar_problem(), Formulation::extended, {1.0, 1.0});
  sp.set_estimates(one(0), one(0));
  CHECK(sp.al_value_and_gradient(one(1), one(3), gx, gz) == 3.0);
  CHECK(gx[0] == 0.0);
  CHECK(gz[0] == 2.0);
}

TEST_CASE("extended gradient matches finite differences") {
  std::mt19937_64 rng(1);
  const GeoProblem P = testing::random_problem(rng, 6, 2, 0);
  Subproblem sp(P, Formulation::extended, {0.3, 0.7});
  sp.set_estimates(testing::random_vector(rng, 6), testing::random_vector(rng, P.m()));
  const InnerProblem ip = sp.inner_problem();
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const VectorXd w = testing::random_vector(rng, ip.dim);
    VectorXd g;
    ip.evaluate(w, g);
    VectorXd fd(ip.dim), scratch;
    const double h = 1e-5 * (1 + w.norm());
    for (Index i = 0; i < ip.dim; ++i) {
      VectorXd e = VectorXd::Zero(ip.dim);
      e[i] = h;
      fd[i] = (ip.evaluate(w + e, scratch) - ip.evaluate(w - e, scratch)) / (2 * h);
    }
    worst = std::max(worst, rel(fd, g));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("project_extended") {
  GeoProblem P;
  P.cost = QuadraticCost::symmetrized(to_sparse(MatrixXd::Identity(2, 2)), VectorXd::Zero(2));
  P.A = to_sparse(MatrixXd::Identity(2, 2));
  P.C = ConstraintSet::complementarity();
  Subproblem cc(P, Formulation::extended, {1, 1});
  VectorXd w(4);
  w << 5, 6, 1, 2;
  cc.project_extended(w);
  CHECK(w == (VectorXd(4) << 5, 6, 0, 2).finished());
  const VectorXd w1 = w;
  cc.project_extended(w);
  CHECK(w == w1);
}

TEST_CASE("marginal examples") {
  Subproblem sp(scalar_problem(), Formulation::condensed_soft, {1.0, 1.0});
  sp.set_estimates(one(0), one(0));
  CHECK(sp.marginal_x(one(3))[0] == doctest::Approx(1.0).epsilon(1e-14));
  VectorXd g;
  CHECK(sp.marginal_value_and_gradient(one(3), g) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-14));

  GeoProblem H = scalar_problem();
  H.A_eq = to_sparse(MatrixXd::Ones(1, 1));
  H.b_eq = one(0);
  Subproblem hard(H, Formulation::condensed_hard, {1.0, 1.0});
  hard.set_estimates(one(0), one(0));
  for (double z : {-4.0, 0.5, 7.0}) CHECK(std::abs(hard.marginal_x(one(z))[0]) <= 1e-15);
}

TEST_CASE("marginal_x at A x* recovers the unconstrained AL minimizer") {
  std::mt19937_64 rng(3);
  const GeoProblem P = testing::random_problem(rng, 5, 2, 0);
  const double mu = 0.8, rho = 0.2;
  Subproblem sp(P, Formulation::condensed_soft, {rho, mu});
  const VectorXd xh = testing::random_vector(rng, 5);
  sp.set_estimates(xh, VectorXd::Zero(P.m()));
  // With y_hat = 0 and z = A x*, x* minimizes mu f + rho/2 ||x - x_hat||^2.
  const MatrixXd H = mu * MatrixXd(P.cost.Q) + rho * MatrixXd::Identity(5, 5);
  const VectorXd xs = H.ldlt().solve(rho * xh - mu * P.cost.q);
  CHECK(rel(sp.marginal_x(P.A * xs), xs) <= 1e-9);
}

TEST_CASE("marginal gradient, affinity, optimality and Lipschitz bound") {
  std::mt19937_64 rng(4);
  for (Formulation f : {Formulation::condensed_soft, Formulation::condensed_hard}) {
    INFO(to_string(f));
    const GeoProblem P = testing::random_problem(rng, 8, 2, 2);
    Subproblem sp(P, f, {0.1, 0.5});
    const Index m = sp.problem().m();
    sp.set_estimates(testing::random_vector(rng, 8), testing::random_vector(rng, m));
    double fd_err = 0.0, aff_err = 0.0, eq_err = 0.0;
    bool optimal = true;
    for (int t = 0; t < 20; ++t) {
      const VectorXd z = testing::random_vector(rng, m);
      VectorXd g, s;
      const double M = sp.marginal_value_and_gradient(z, g);
      VectorXd fd(m);
      const double h = 1e-5 * (1 + z.norm());
      for (Index i = 0; i < m; ++i) {
        VectorXd e = VectorXd::Zero(m);
        e[i] = h;
        fd[i] = (sp.marginal_value_and_gradient(z + e, s) - sp.marginal_value_and_gradient(z - e, s)) /
                (2 * h);
      }
      fd_err = std::max(fd_err, rel(fd, g));
      const VectorXd z2 = testing::random_vector(rng, m);
      const double a = 0.3;
      aff_err = std::max(aff_err, rel(sp.marginal_x(a * z + (1 - a) * z2),
                                      a * sp.marginal_x(z) + (1 - a) * sp.marginal_x(z2)));
      const VectorXd x = sp.marginal_x(z);
      if (f == Formulation::condensed_hard) {
        eq_err = std::max(eq_err, (*P.A_eq * x - *P.b_eq).lpNorm<Eigen::Infinity>() /
                                      (1 + P.b_eq->norm()));
        // Marginal optimality over the equality-feasible affine set.
        Eigen::FullPivLU<MatrixXd> lu(MatrixXd(*P.A_eq));
        const MatrixXd K = lu.kernel();
        for (int k = 0; k < 5; ++k)
          optimal = optimal && M <= sp.al_value(x + K * testing::random_vector(rng, K.cols()), z);
      } else {
        for (int k = 0; k < 5; ++k)
          optimal = optimal && M <= sp.al_value(x + testing::random_vector(rng, 8), z);
      }
    }
    CHECK(fd_err <= 1e-6);
    CHECK(aff_err <= 1e-9);
    CHECK(eq_err <= 1e-10);
    CHECK(optimal);

    const VectorXd x0 = sp.marginal_x(VectorXd::Zero(m));
    MatrixXd Xlin(8, m);
    for (Index i = 0; i < m; ++i) Xlin.col(i) = sp.marginal_x(VectorXd::Unit(m, i)) - x0;
    const double L = 1.01 * (operator_norm_estimate(sp.problem().A, 200) *
                                 operator_norm_estimate(Xlin, 200) +
                             1.0);
    bool lipschitz = true;
    for (int t = 0; t < 50; ++t) {
      const VectorXd z1 = testing::random_vector(rng, m), z2 = testing::random_vector(rng, m);
      VectorXd g1, g2;
      sp.marginal_value_and_gradient(z1, g1);
      sp.marginal_value_and_gradient(z2, g2);
      lipschitz = lipschitz && (g1 - g2).norm() <= L * (z1 - z2).norm();
    }
    CHECK(lipschitz);
  }
}

TEST_CASE("factorization cache follows sigma") {
  std::mt19937_64 rng(5);
  const GeoProblem P = testing::random_problem(rng, 6, 2, 1);
  Subproblem sp(P, Formulation::condensed_hard, {1.0, 1.0});
  sp.set_estimates(VectorXd::Zero(6), VectorXd::Zero(P.m()));
  const VectorXd z = testing::random_vector(rng, P.m());
  const std::vector<PenaltyPair> script{{1.0, 1.0}, {1.0, 1.0}, {1.0, 0.25}, {1.0, 0.25}, {0.5, 0.25}};
  for (const auto& s : script) {
    sp.invalidate_cache(s);
    sp.marginal_x(z);
    sp.marginal_x(2 * z);
  }
  CHECK(sp.factorization_count() == 3);
  sp.invalidate_cache({0.5, 0.25});
  CHECK(sp.has_cached_factorization());
  sp.invalidate_cache({0.25, 0.25});
  CHECK_FALSE(sp.has_cached_factorization());
  sp.marginal_x(z);
  CHECK(sp.factorization_count() == 4);
}

TEST_CASE("condensed stationarity carries over to the extended subproblem") {
  std::mt19937_64 rng(6);
  const GeoProblem P = testing::random_problem(rng, 6, 2, 0);
  Subproblem soft(P, Formulation::condensed_soft, {0.2, 0.5});
  Subproblem ext(P, Formulation::extended, {0.2, 0.5});
  const VectorXd xh = testing::random_vector(rng, 6), yh = testing::random_vector(rng, P.m());
  soft.set_estimates(xh, yh);
  ext.set_estimates(xh, yh);
  const InnerResult r =
      panoc_solve(soft.inner_problem(), P.C.project(testing::random_vector(rng, P.m())), 1e-8);
  REQUIRE(r.status == InnerStatus::converged);
  // At (X(z), z) the x-block of the extended gradient vanishes and the z-block
  // is grad M(z), so both formulations share the same stationarity measure.
  VectorXd gm, gx, gz;
  soft.marginal_value_and_gradient(r.w_star, gm);
  ext.al_value_and_gradient(soft.marginal_x(r.w_star), r.w_star, gx, gz);
  CHECK(gx.norm() <= 1e-9);
  CHECK((gz - gm).norm() <= 1e-9);
}
