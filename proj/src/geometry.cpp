#include "geoqp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace geoqp {

struct ConstraintSet::Node {
  Kind kind;
  Index dim = 0;
  VectorXd lo, hi;
  VectorXd offset;
  VectorXd factors;
  std::vector<ConstraintSet> children;
  // Scale nodes carry an equivalent tree with the scaling pushed into the leaves.
  std::shared_ptr<const Node> lowered;
};

namespace {

using Node = ConstraintSet::Node;

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

inline double sq(double a) { return a * a; }

// Two-dimensional primitives; a, b are overwritten with the chosen branch.
void project_cc(double& a, double& b) {
  const double ap = std::max(a, 0.0);
  const double bp = std::max(b, 0.0);
  const double d1 = sq(a - ap) + sq(b);
  const double d2 = sq(a) + sq(b - bp);
  if (d2 < d1) {
    a = 0.0;
    b = bp;
  } else {
    a = ap;
    b = 0.0;
  }
}

void project_sc(double& a, double& b) {
  if (sq(a) < sq(b)) {
    a = 0.0;
  } else {
    b = 0.0;
  }
}

void project_vc(double& a, double& b) {
  const double ap = std::max(a, 0.0);
  const double bp = std::max(b, 0.0);
  const double d1 = sq(a);
  const double d2 = sq(a - ap) + sq(b - bp);
  if (d2 < d1) {
    a = ap;
    b = bp;
  } else {
    a = 0.0;
  }
}

void project_eoc(double& a, double& b) {
  const double d1 = sq(std::max(a, 0.0));
  const double d2 = sq(std::min(b, 0.0));
  if (d2 < d1) {
    b = std::max(b, 0.0);
  } else {
    a = std::min(a, 0.0);
  }
}

void project_node(const Node& node, Eigen::Ref<VectorXd> v);

void project_node(const Node& node, Eigen::Ref<VectorXd> v) {
  switch (node.kind) {
    case ConstraintSet::Kind::Zero:
      v.setZero();
      return;
    case ConstraintSet::Kind::Box:
      for (Index i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], node.lo[i], node.hi[i]);
      return;
    case ConstraintSet::Kind::Nonneg:
      for (Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i], 0.0);
      return;
    case ConstraintSet::Kind::Complementarity:
      project_cc(v[0], v[1]);
      return;
    case ConstraintSet::Kind::Switching:
      project_sc(v[0], v[1]);
      return;
    case ConstraintSet::Kind::Vanishing:
      project_vc(v[0], v[1]);
      return;
    case ConstraintSet::Kind::EitherOr:
      project_eoc(v[0], v[1]);
      return;
    case ConstraintSet::Kind::UnionOfConvex: {
      VectorXd best;
      double best_dist = kInf;
      VectorXd candidate(v.size());
      for (const auto& child : node.children) {
        candidate = v;
        child.project_inplace(candidate);
        const double d = (candidate - v).squaredNorm();
        if (d < best_dist) {
          best_dist = d;
          best = candidate;
        }
      }
      v = best;
      return;
    }
    case ConstraintSet::Kind::Translate: {
      v -= node.offset;
      node.children.front().project_inplace(v);
      v += node.offset;
      return;
    }
    case ConstraintSet::Kind::Scale:
      project_node(*node.lowered, v);
      return;
    case ConstraintSet::Kind::Product: {
      Index start = 0;
      for (const auto& child : node.children) {
        child.project_inplace(v.segment(start, child.dim()));
        start += child.dim();
      }
      return;
    }
  }
}

bool node_is_convex(const Node& node) {
  switch (node.kind) {
    case ConstraintSet::Kind::Zero:
    case ConstraintSet::Kind::Box:
    case ConstraintSet::Kind::Nonneg:
      return true;
    case ConstraintSet::Kind::Translate:
    case ConstraintSet::Kind::Scale:
      return node.children.front().is_convex();
    case ConstraintSet::Kind::Product:
      return std::all_of(node.children.begin(), node.children.end(),
                         [](const ConstraintSet& c) { return c.is_convex(); });
    default:
      return false;
  }
}

bool is_positive_cone_invariant(ConstraintSet::Kind kind) {
  // Sets mapped onto themselves by every positive diagonal scaling.
  switch (kind) {
    case ConstraintSet::Kind::Zero:
    case ConstraintSet::Kind::Nonneg:
    case ConstraintSet::Kind::Complementarity:
    case ConstraintSet::Kind::Switching:
    case ConstraintSet::Kind::Vanishing:
    case ConstraintSet::Kind::EitherOr:
      return true;
    default:
      return false;
  }
}

}  // namespace

ConstraintSet::ConstraintSet(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

ConstraintSet ConstraintSet::zero(Index dim) {
  if (dim < 0) throw std::invalid_argument("zero: negative dimension");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Zero;
  n->dim = dim;
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::box(VectorXd lo, VectorXd hi) {
  require_dim(lo.size(), hi.size(), "box");
  for (Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
      throw std::invalid_argument("box: empty or NaN bounds at coordinate " + std::to_string(i));
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Box;
  n->dim = lo.size();
  n->lo = std::move(lo);
  n->hi = std::move(hi);
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::nonneg(Index dim) {
  if (dim < 0) throw std::invalid_argument("nonneg: negative dimension");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Nonneg;
  n->dim = dim;
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::planar(Kind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->dim = 2;
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::complementarity() { return planar(Kind::Complementarity); }
ConstraintSet ConstraintSet::switching() { return planar(Kind::Switching); }
ConstraintSet ConstraintSet::vanishing() { return planar(Kind::Vanishing); }
ConstraintSet ConstraintSet::either_or() { return planar(Kind::EitherOr); }

ConstraintSet ConstraintSet::union_of_convex(std::vector<ConstraintSet> children) {
  if (children.empty()) throw std::invalid_argument("union_of_convex: no children");
  const Index d = children.front().dim();
  for (const auto& c : children) {
    require_dim(d, c.dim(), "union_of_convex");
    if (!c.is_convex()) {
      throw std::invalid_argument("union_of_convex: child of kind '" + c.kind_name() +
                                  "' is not convex");
    }
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::UnionOfConvex;
  n->dim = d;
  n->children = std::move(children);
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::translate(ConstraintSet inner, VectorXd offset) {
  require_dim(inner.dim(), offset.size(), "translate");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Translate;
  n->dim = inner.dim();
  n->offset = std::move(offset);
  n->children.push_back(std::move(inner));
  return ConstraintSet(std::move(n));
}

namespace {

// diag(f) * S as a tree without Scale nodes.
ConstraintSet lower_scale(const ConstraintSet& s, const VectorXd& f) {
  using K = ConstraintSet::Kind;
  if (is_positive_cone_invariant(s.kind())) return s;
  switch (s.kind()) {
    case K::Box:
      return ConstraintSet::box(s.lower().cwiseProduct(f), s.upper().cwiseProduct(f));
    case K::Translate:
      return ConstraintSet::translate(lower_scale(s.inner(), f), s.offset().cwiseProduct(f));
    case K::Scale:
      return lower_scale(s.inner(), s.factors().cwiseProduct(f));
    case K::Product: {
      std::vector<ConstraintSet> kids;
      Index start = 0;
      for (const auto& c : s.children()) {
        kids.push_back(lower_scale(c, f.segment(start, c.dim())));
        start += c.dim();
      }
      return ConstraintSet::product(std::move(kids));
    }
    case K::UnionOfConvex: {
      std::vector<ConstraintSet> kids;
      for (const auto& c : s.children()) kids.push_back(lower_scale(c, f));
      return ConstraintSet::union_of_convex(std::move(kids));
    }
    default:
      throw std::logic_error("lower_scale: unhandled kind");
  }
}

}  // namespace

ConstraintSet ConstraintSet::scale(ConstraintSet inner, VectorXd factors) {
  require_dim(inner.dim(), factors.size(), "scale");
  if ((factors.array() <= 0.0).any() || !factors.allFinite()) {
    throw std::invalid_argument("scale: factors must be finite and strictly positive");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Scale;
  n->dim = inner.dim();
  n->lowered = lower_scale(inner, factors).node_;
  n->factors = std::move(factors);
  n->children.push_back(std::move(inner));
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::product(std::vector<ConstraintSet> children) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->dim = 0;
  for (const auto& c : children) n->dim += c.dim();
  n->children = std::move(children);
  return ConstraintSet(std::move(n));
}

ConstraintSet ConstraintSet::repeat(const ConstraintSet& block, Index count) {
  if (count < 0) throw std::invalid_argument("repeat: negative count");
  return product(std::vector<ConstraintSet>(static_cast<std::size_t>(count), block));
}

ConstraintSet ConstraintSet::free(Index dim) {
  return box(VectorXd::Constant(dim, -kInf), VectorXd::Constant(dim, kInf));
}

ConstraintSet::Kind ConstraintSet::kind() const { return node_->kind; }
Index ConstraintSet::dim() const { return node_->dim; }
bool ConstraintSet::is_convex() const { return node_is_convex(*node_); }

const VectorXd& ConstraintSet::lower() const { return node_->lo; }
const VectorXd& ConstraintSet::upper() const { return node_->hi; }
const VectorXd& ConstraintSet::offset() const { return node_->offset; }
const VectorXd& ConstraintSet::factors() const { return node_->factors; }
const std::vector<ConstraintSet>& ConstraintSet::children() const { return node_->children; }

const ConstraintSet& ConstraintSet::inner() const {
  if (node_->kind != Kind::Translate && node_->kind != Kind::Scale) {
    throw std::logic_error("inner: node of kind '" + kind_name() + "' has no inner set");
  }
  return node_->children.front();
}

void ConstraintSet::project_inplace(Eigen::Ref<VectorXd> v) const {
  require_dim(node_->dim, v.size(), "project");
  project_node(*node_, v);
}

VectorXd ConstraintSet::project(const VectorXd& v) const {
  VectorXd out = v;
  project_inplace(out);
  return out;
}

double ConstraintSet::distance(const VectorXd& v) const { return (v - project(v)).norm(); }

bool ConstraintSet::contains(const VectorXd& v, double tol) const { return distance(v) <= tol; }

VectorXd ConstraintSet::sample(std::uint64_t seed) const {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  VectorXd v(dim());
  for (Index i = 0; i < v.size(); ++i) v[i] = unif(gen);
  project_inplace(v);
  return v;
}

std::string ConstraintSet::kind_name() const {
  switch (node_->kind) {
    case Kind::Zero: return "zero";
    case Kind::Box: return "box";
    case Kind::Nonneg: return "nonneg";
    case Kind::Complementarity: return "cc";
    case Kind::Switching: return "sc";
    case Kind::Vanishing: return "vc";
    case Kind::EitherOr: return "eoc";
    case Kind::UnionOfConvex: return "union";
    case Kind::Translate: return "translate";
    case Kind::Scale: return "scale";
    case Kind::Product: return "product";
  }
  return "unknown";
}

}  // namespace geoqp
