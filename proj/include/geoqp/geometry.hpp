#pragma once

// Constraint-set algebra. Every set exposes an exact Euclidean projection;
// distance and membership are derived from it.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace geoqp {

using Eigen::Index;
using Eigen::VectorXd;

/// Immutable expression tree describing a closed set C in R^d.
///
/// Nonconvex primitives (complementarity, switching, vanishing, either-or)
/// are unions of simple convex pieces. When several pieces are equally close
/// the first one in the fixed order below wins:
///   complementarity  {(a,0): a>=0}  then {(0,b): b>=0}
///   switching        {(a,0)}        then {(0,b)}
///   vanishing        {0} x R        then R_+^2
///   either-or        {a<=0}         then {b>=0}
/// union_of_convex uses the order of its children.
class ConstraintSet {
public:
  enum class Kind {
    Zero,
    Box,
    Nonneg,
    Complementarity,
    Switching,
    Vanishing,
    EitherOr,
    UnionOfConvex,
    Translate,
    Scale,
    Product,
  };

  static ConstraintSet zero(Index dim);
  /// Infinite bounds are allowed; requires lo <= hi componentwise.
  static ConstraintSet box(VectorXd lo, VectorXd hi);
  static ConstraintSet nonneg(Index dim);
  static ConstraintSet complementarity();
  static ConstraintSet switching();
  static ConstraintSet vanishing();
  static ConstraintSet either_or();
  /// All children must be convex and share one dimension.
  static ConstraintSet union_of_convex(std::vector<ConstraintSet> children);
  /// offset + inner
  static ConstraintSet translate(ConstraintSet inner, VectorXd offset);
  /// diag(factors) * inner, factors strictly positive.
  static ConstraintSet scale(ConstraintSet inner, VectorXd factors);
  static ConstraintSet product(std::vector<ConstraintSet> children);
  /// Product of `count` copies of `block`.
  static ConstraintSet repeat(const ConstraintSet& block, Index count);
  /// The whole space R^dim, realized as an unbounded box.
  static ConstraintSet free(Index dim);

  Kind kind() const;
  Index dim() const;
  bool is_convex() const;

  // Node payload accessors (meaningful only for the matching kinds).
  const VectorXd& lower() const;
  const VectorXd& upper() const;
  const VectorXd& offset() const;
  const VectorXd& factors() const;
  const std::vector<ConstraintSet>& children() const;
  /// Translate/Scale: the wrapped set.
  const ConstraintSet& inner() const;

  /// Overwrites v with a nearest point of the set.
  void project_inplace(Eigen::Ref<VectorXd> v) const;

  VectorXd project(const VectorXd& v) const;
  double distance(const VectorXd& v) const;
  bool contains(const VectorXd& v, double tol = 1e-9) const;

  /// Uniform draw from [-10,10]^d followed by projection.
  VectorXd sample(std::uint64_t seed) const;

  std::string kind_name() const;

  struct Node;

private:
  explicit ConstraintSet(std::shared_ptr<const Node> node);
  static ConstraintSet planar(Kind kind);
  std::shared_ptr<const Node> node_;
};

}  // namespace geoqp
