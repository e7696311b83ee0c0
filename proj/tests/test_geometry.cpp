#include <doctest.h>

#include <random>

#include "geoqp/benchmarks.hpp"
#include "geoqp/geometry.hpp"
#include "support.hpp"

using namespace geoqp;

namespace {

VectorXd v2(double a, double b) { return (VectorXd(2) << a, b).finished(); }

bool same(const VectorXd& a, const VectorXd& b) { return a.size() == b.size() && a == b; }

std::vector<ConstraintSet> all_kinds() {
  const VectorXd lo = v2(-1, 0), hi = v2(2, std::numeric_limits<double>::infinity());
  return {ConstraintSet::zero(2),
          ConstraintSet::box(lo, hi),
          ConstraintSet::nonneg(2),
          ConstraintSet::complementarity(),
          ConstraintSet::switching(),
          ConstraintSet::vanishing(),
          ConstraintSet::either_or(),
          Afti16::control_set(),
          ConstraintSet::translate(ConstraintSet::complementarity(), v2(0, -1)),
          ConstraintSet::scale(ConstraintSet::either_or(), v2(2, 0.5)),
          ConstraintSet::product({ConstraintSet::complementarity(), ConstraintSet::nonneg(1)})};
}

}  // namespace

TEST_CASE("projection examples") {
  const auto cc = ConstraintSet::complementarity();
  CHECK(same(cc.project(v2(1, 2)), v2(0, 2)));
  CHECK(same(cc.project(v2(-1, -2)), v2(0, 0)));
  CHECK(same(cc.project(v2(0, 3)), v2(0, 3)));
  CHECK(same(ConstraintSet::switching().project(v2(3, -1)), v2(3, 0)));
  CHECK(same(ConstraintSet::vanishing().project(v2(-2, 5)), v2(0, 5)));
  CHECK(same(ConstraintSet::either_or().project(v2(1, -1)), v2(0, -1)));
  CHECK(same(Afti16::control_set().project(v2(30, 4)), v2(25, 0)));
}

TEST_CASE("distance and membership examples") {
  const auto cc = ConstraintSet::complementarity();
  CHECK(cc.distance(v2(0, 2)) == 0.0);
  CHECK(cc.distance(v2(1, 2)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto prod = ConstraintSet::product({cc, cc});
  // Blockwise: 1 from (1,2) and sqrt(5) from (-1,-2), which projects to (0,0).
  CHECK(prod.distance((VectorXd(4) << 1, 2, -1, -2).finished()) == doctest::Approx(std::sqrt(6.0)));
  CHECK(prod.distance((VectorXd(4) << 1, 2, 0, 3).finished()) == doctest::Approx(1.0));
  CHECK(cc.contains(v2(0, 2), 0.0));
  CHECK(cc.contains(v2(1e-9, 1e-9), 1e-6));
  CHECK_FALSE(ConstraintSet::either_or().contains(v2(1, -1), 0.5));
}

TEST_CASE("sampling") {
  CHECK(same(ConstraintSet::zero(3).sample(7), VectorXd::Zero(3)));
  const auto box = ConstraintSet::box(VectorXd::Zero(1), VectorXd::Ones(1));
  const VectorXd s = box.sample(42);
  CHECK(s[0] >= 0.0);
  CHECK(s[0] <= 1.0);
  CHECK(same(box.sample(42), s));
  for (const auto& S : all_kinds())
    for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(S.contains(S.sample(seed), 1e-12));
}

TEST_CASE("idempotence on 1000 random points per kind") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (const auto& S : all_kinds()) {
    INFO(S.kind_name());
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
      VectorXd v(S.dim());
      for (Index k = 0; k < v.size(); ++k) v[k] = u(rng);
      const VectorXd p = S.project(v);
      ok = ok && same(S.project(p), p);
    }
    CHECK(ok);
  }
}

TEST_CASE("optimality against sampled feasible points") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  for (const auto& S : all_kinds()) {
    INFO(S.kind_name());
    std::vector<VectorXd> samples;
    for (std::uint64_t s = 0; s < 100; ++s) samples.push_back(S.sample(1000 + s));
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      VectorXd v(S.dim());
      for (Index k = 0; k < v.size(); ++k) v[k] = u(rng);
      const double d = S.distance(v);
      for (const auto& s : samples) ok = ok && d <= (v - s).norm() + 1e-12;
    }
    CHECK(ok);
  }
}

TEST_CASE("translate conjugation and product decomposition") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  const VectorXd c0 = v2(0.5, -1);
  const auto inner = ConstraintSet::either_or();
  const auto T = ConstraintSet::translate(inner, c0);
  const auto P = ConstraintSet::product({ConstraintSet::complementarity(), ConstraintSet::vanishing()});
  for (int i = 0; i < 1000; ++i) {
    const VectorXd v = v2(u(rng), u(rng));
    const VectorXd expect = c0 + inner.project(v - c0);
    REQUIRE(same(T.project(v), expect));
    const VectorXd w = (VectorXd(4) << u(rng), u(rng), u(rng), u(rng)).finished();
    VectorXd blocks(4);
    blocks << ConstraintSet::complementarity().project(w.head(2)),
        ConstraintSet::vanishing().project(w.tail(2));
    REQUIRE(same(P.project(w), blocks));
  }
}

TEST_CASE("grid oracle agrees with the 2-d primitives") {
  struct Case {
    ConstraintSet S;
    testing::Membership in;
  };
  const std::vector<Case> cases{{ConstraintSet::complementarity(), testing::in_cc},
                                {ConstraintSet::switching(), testing::in_sc},
                                {ConstraintSet::vanishing(), testing::in_vc},
                                {ConstraintSet::either_or(), testing::in_eoc},
                                {Afti16::control_set(), testing::in_afti_u}};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10, 10);
  // Half-diagonal of a grid cell bounds the oracle's own error.
  const double h = 0.05 / std::sqrt(2.0);
  for (const auto& c : cases) {
    INFO(c.S.kind_name());
    const auto grid = testing::feasible_grid(c.in);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector2d v(u(rng), u(rng));
      const double d = c.S.distance(v);
      const double g = testing::grid_distance(grid, v);
      CHECK(d <= g + 1e-12);
      worst = std::max(worst, g - d);
    }
    CHECK(worst <= h);
  }
}

TEST_CASE("construction errors") {
  CHECK_THROWS(ConstraintSet::union_of_convex({ConstraintSet::complementarity()}));
  CHECK_THROWS(ConstraintSet::box(v2(1, 0), v2(0, 0)));
  CHECK_THROWS(ConstraintSet::complementarity().project(VectorXd::Zero(3)));
  CHECK_THROWS(ConstraintSet::scale(ConstraintSet::nonneg(2), v2(1, 0)));
}
