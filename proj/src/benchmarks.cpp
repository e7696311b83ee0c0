#include "geoqp/benchmarks.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

namespace geoqp {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(Index rows, Index cols, const Triplets& t) {
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

}  // namespace

const Slice& BenchmarkInstance::slice(const std::string& name) const {
  for (const auto& s : layout)
    if (s.name == name) return s;
  throw std::out_of_range("BenchmarkInstance: no slice named '" + name + "'");
}

BenchmarkInstance build_ivp(Index N, std::optional<double> x_start) {
  if (N < 2) throw std::invalid_argument("build_ivp: N must be at least 2");
  const double h = 2.0 / static_cast<double>(N);
  const double x_ref = 5.0 / 3.0;
  const Index n = 3 * N + 1;
  auto ix = [](Index k) { return k; };
  auto iy = [N](Index k) { return N + k; };          // k = 1..N
  auto il = [N](Index k) { return 2 * N + k; };      // k = 1..N

  Triplets q_t;
  VectorXd q = VectorXd::Zero(n);
  for (Index k = 0; k < N; ++k) q_t.emplace_back(ix(k), ix(k), 2.0 * h);
  q_t.emplace_back(ix(N), ix(N), 2.0);
  q[ix(N)] = -2.0 * x_ref;

  // Per step: (x_k + lambda_k, -y_k) in (0,-1) + CC and (lambda_k, y_k) in CC.
  Triplets a_t;
  std::vector<ConstraintSet> blocks;
  const ConstraintSet cc = ConstraintSet::complementarity();
  Eigen::Vector2d shift(0.0, -1.0);
  const ConstraintSet shifted_cc = ConstraintSet::translate(cc, shift);
  for (Index k = 1; k <= N; ++k) {
    const Index r = 4 * (k - 1);
    a_t.emplace_back(r, ix(k), 1.0);
    a_t.emplace_back(r, il(k), 1.0);
    a_t.emplace_back(r + 1, iy(k), -1.0);
    a_t.emplace_back(r + 2, il(k), 1.0);
    a_t.emplace_back(r + 3, iy(k), 1.0);
    blocks.push_back(shifted_cc);
    blocks.push_back(cc);
  }

  // x_k - x_{k-1} + 2h y_k = 3h
  const Index p = N + (x_start ? 1 : 0);
  Triplets e_t;
  VectorXd b = VectorXd::Zero(p);
  for (Index k = 1; k <= N; ++k) {
    e_t.emplace_back(k - 1, ix(k), 1.0);
    e_t.emplace_back(k - 1, ix(k - 1), -1.0);
    e_t.emplace_back(k - 1, iy(k), 2.0 * h);
    b[k - 1] = 3.0 * h;
  }
  if (x_start) {
    e_t.emplace_back(N, ix(0), 1.0);
    b[N] = *x_start;
  }

  BenchmarkInstance inst;
  inst.name = "ivp";
  inst.N = N;
  inst.problem.cost = QuadraticCost{from_triplets(n, n, q_t), q};
  inst.problem.A = from_triplets(4 * N, n, a_t);
  inst.problem.C = ConstraintSet::product(std::move(blocks));
  inst.problem.A_eq = from_triplets(p, n, e_t);
  inst.problem.b_eq = b;
  inst.layout = {{"x", 0, N + 1}, {"y", N + 1, N}, {"lambda", 2 * N + 1, N}};
  inst.cost_offset = x_ref * x_ref;
  return inst;
}

BenchmarkInstance build_obstacle(Index N, double laplacian_scale) {
  if (N < 2) throw std::invalid_argument("build_obstacle: N must be at least 2");
  const Index n = 3 * N;
  Triplets q_t;
  VectorXd q = VectorXd::Zero(n);
  for (Index i = 0; i < 2 * N; ++i) q_t.emplace_back(i, i, 1.0);
  q.segment(N, N).setConstant(-1.0);

  Triplets a_t;
  for (Index i = 0; i < N; ++i) a_t.emplace_back(i, i, 1.0);
  for (Index i = 0; i < N; ++i) {
    a_t.emplace_back(N + 2 * i, N + i, 1.0);
    a_t.emplace_back(N + 2 * i + 1, 2 * N + i, 1.0);
  }
  std::vector<ConstraintSet> blocks{ConstraintSet::nonneg(N)};
  for (Index i = 0; i < N; ++i) blocks.push_back(ConstraintSet::complementarity());

  Triplets e_t;
  for (Index i = 0; i < N; ++i) {
    e_t.emplace_back(i, i, 1.0);
    e_t.emplace_back(i, N + i, 2.0 * laplacian_scale);
    if (i > 0) e_t.emplace_back(i, N + i - 1, -laplacian_scale);
    if (i + 1 < N) e_t.emplace_back(i, N + i + 1, -laplacian_scale);
    e_t.emplace_back(i, 2 * N + i, -1.0);
  }

  BenchmarkInstance inst;
  inst.name = "obstacle";
  inst.N = N;
  inst.problem.cost = QuadraticCost{from_triplets(n, n, q_t), q};
  inst.problem.A = from_triplets(3 * N, n, a_t);
  inst.problem.C = ConstraintSet::product(std::move(blocks));
  inst.problem.A_eq = from_triplets(N, n, e_t);
  inst.problem.b_eq = VectorXd::Zero(N);
  inst.layout = {{"x", 0, N}, {"y", N, N}, {"z", 2 * N, N}};
  return inst;
}

Eigen::Matrix4d Afti16::A() {
  Eigen::Matrix4d A;
  A << 0.9993, -3.0083, -0.1131, -1.6081,
       -4.703e-6, 0.9862, 0.0478, 3.85e-6,
       3.703e-6, 2.0833, 1.0089, -4.362e-6,
       1.356e-7, 0.0526, 0.0498, 1.0;
  return A;
}

Eigen::Matrix<double, 4, 2> Afti16::B() {
  Eigen::Matrix<double, 4, 2> B;
  B << -0.08045, -0.6347,
       -0.02914, -0.01428,
       -0.8679, -0.0913,
       -0.02159, -0.002181;
  return B;
}

Eigen::Matrix<double, 2, 4> Afti16::C() {
  Eigen::Matrix<double, 2, 4> C;
  C << 0, 1, 0, 0,
       0, 0, 0, 1;
  return C;
}

ConstraintSet Afti16::control_set() {
  const VectorXd lo = VectorXd::Constant(1, -u_max), hi = VectorXd::Constant(1, u_max);
  const ConstraintSet bound = ConstraintSet::box(lo, hi);
  return ConstraintSet::union_of_convex(
      {ConstraintSet::product({bound, ConstraintSet::zero(1)}),
       ConstraintSet::product({ConstraintSet::zero(1), bound})});
}

BenchmarkInstance build_afti16(Index N, const Eigen::Vector4d& x_init) {
  if (N < 1) throw std::invalid_argument("build_afti16: N must be at least 1");
  const Index n = 6 * N;
  auto ix = [](Index k) { return 4 * (k - 1); };   // x_k, k = 1..N
  auto iu = [N](Index k) { return 4 * N + 2 * k; }; // u_k, k = 0..N-1
  const Eigen::Matrix4d Ad = Afti16::A();
  const Eigen::Matrix<double, 4, 2> Bd = Afti16::B();
  const Eigen::Matrix<double, 2, 4> Cd = Afti16::C();
  const Eigen::Matrix4d CtC2 = 2.0 * Cd.transpose() * Cd;
  const double u_weight = 2.0 / (Afti16::u_max * Afti16::u_max);

  Triplets q_t;
  for (Index k = 1; k <= N; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (CtC2(i, j) != 0.0) q_t.emplace_back(ix(k) + i, ix(k) + j, CtC2(i, j));
  for (Index k = 0; k < N; ++k) {
    q_t.emplace_back(iu(k), iu(k), u_weight);
    q_t.emplace_back(iu(k) + 1, iu(k) + 1, u_weight);
  }

  Triplets a_t;
  for (Index k = 0; k < N; ++k) {
    a_t.emplace_back(2 * k, iu(k), 1.0);
    a_t.emplace_back(2 * k + 1, iu(k) + 1, 1.0);
  }

  // x_{k+1} - A x_k - B u_k = 0, with A x_init on the right for k = 0.
  Triplets e_t;
  VectorXd b = VectorXd::Zero(4 * N);
  b.head(4) = Ad * x_init;
  for (Index k = 0; k < N; ++k) {
    const Index r = 4 * k;
    for (int i = 0; i < 4; ++i) {
      e_t.emplace_back(r + i, ix(k + 1) + i, 1.0);
      for (int j = 0; j < 4; ++j)
        if (k > 0 && Ad(i, j) != 0.0) e_t.emplace_back(r + i, ix(k) + j, -Ad(i, j));
      for (int j = 0; j < 2; ++j)
        if (Bd(i, j) != 0.0) e_t.emplace_back(r + i, iu(k) + j, -Bd(i, j));
    }
  }

  BenchmarkInstance inst;
  inst.name = "afti16";
  inst.N = N;
  inst.problem.cost = QuadraticCost{from_triplets(n, n, q_t), VectorXd::Zero(n)};
  inst.problem.A = from_triplets(2 * N, n, a_t);
  inst.problem.C = ConstraintSet::repeat(Afti16::control_set(), N);
  inst.problem.A_eq = from_triplets(4 * N, n, e_t);
  inst.problem.b_eq = b;
  inst.layout = {{"x", 0, 4 * N}, {"u", 4 * N, 2 * N}};
  return inst;
}

AlmInit random_init(const GeoProblem& P, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  AlmInit init;
  init.x0.resize(P.n());
  for (Index i = 0; i < P.n(); ++i) init.x0[i] = normal(gen);
  init.y0 = VectorXd::Zero(P.m());
  init.z0 = P.C.project(P.A * init.x0);
  return init;
}

namespace {

// Shift a stacked sequence of `count` blocks of size `width` forward by one
// block, repeating the last one.
VectorXd shift_blocks(const VectorXd& v, Index width) {
  const Index count = v.size() / width;
  VectorXd out(v.size());
  if (count == 0) return out;
  out.head((count - 1) * width) = v.segment(width, (count - 1) * width);
  out.tail(width) = v.tail(width);
  return out;
}

}  // namespace

MpcTrace mpc_simulate(const MpcOptions& opts) {
  if (opts.steps < 1) throw std::invalid_argument("mpc_simulate: steps must be at least 1");
  const Index N = opts.horizon;
  const Eigen::Matrix4d Ad = Afti16::A();
  const Eigen::Matrix<double, 4, 2> Bd = Afti16::B();
  const ConstraintSet U = Afti16::control_set();

  MpcTrace trace;
  trace.disturb_at = opts.disturb_at;
  Eigen::Vector4d state = opts.x_start;
  std::optional<PrimalDualTriple> previous;

  for (Index step = 0; step < opts.steps; ++step) {
    MpcRow row;
    row.step = step;
    row.t_s = static_cast<double>(step) * Afti16::sample_time;
    row.warm = opts.warm;
    if (step == opts.disturb_at) {
      state = opts.x_start;
      row.disturbed = true;
    }
    row.x = state;

    const BenchmarkInstance inst = build_afti16(N, state);
    const GeoProblem& P = inst.problem;
    AlmInit init;
    if (opts.warm && previous) {
      init.x0.resize(P.n());
      init.x0.head(4 * N) = shift_blocks(previous->x.head(4 * N), 4);
      init.x0.tail(2 * N) = shift_blocks(previous->x.tail(2 * N), 2);
      init.y0 = shift_blocks(previous->y, 2);
      init.z0 = P.C.project(P.A * init.x0);
    } else {
      init = random_init(P, opts.seed + static_cast<std::uint64_t>(step));
    }

    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    try {
      const auto t0 = Clock::now();
      const AlmResult res = alm_solve(P, opts.solver, init);
      row.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
      row.status = res.status;
      if (res.status == AlmStatus::solved) {
        VectorXd u0 = res.triple.x.segment(inst.slice("u").start, 2);
        U.project_inplace(u0);
        u = u0;
        previous = res.triple;
      } else {
        row.solver_failed = true;
        previous.reset();
      }
    } catch (const std::exception&) {
      row.solver_failed = true;
      previous.reset();
    }
    row.u = u;
    trace.rows.push_back(row);
    state = Ad * state + Bd * u;
  }
  trace.final_state = state;
  return trace;
}

}  // namespace geoqp
