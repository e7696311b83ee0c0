#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoqp/alm.hpp"
#include "geoqp/problem.hpp"

namespace geoqp {

/// Named range [start, start + size) of the decision vector.
struct Slice {
  std::string name;
  Index start = 0;
  Index size = 0;
};

struct BenchmarkInstance {
  GeoProblem problem;
  std::string name;
  Index N = 0;
  std::vector<Slice> layout;  ///< partitions [0, n)
  /// Constant dropped from the cost; f(x) + cost_offset is the model's objective.
  double cost_offset = 0.0;

  const Slice& slice(const std::string& name) const;
};

/// Implicit-Euler discretization of a switching initial value problem on [0, 2]:
///   minimize (x_N - 5/3)^2 + h sum_{k<N} x_k^2,  h = 2/N
///   x_k = x_{k-1} + h (3 - 2 y_k),
///   0 <= x_k + lambda_k  perp  1 - y_k >= 0,   0 <= lambda_k  perp  y_k >= 0.
/// Variables (x_0..x_N, y_1..y_N, lambda_1..lambda_N). When `x_start` is set, a
/// hard equality pins x_0.
BenchmarkInstance build_ivp(Index N, std::optional<double> x_start = -1.0);

/// Discretized obstacle control problem over (x, y, z) in R^{3N}:
///   minimize 1/2|x|^2 + 1/2|y|^2 - <1, y>
///   x >= 0,  min{y, z} = 0,  x + L y - z = 0
/// with L = laplacian_scale * tridiag(-1, 2, -1).
BenchmarkInstance build_obstacle(Index N, double laplacian_scale = 1.0);

/// Discrete-time AFTI-16 longitudinal model (Ts = 50 ms).
struct Afti16 {
  static constexpr double sample_time = 0.05;
  static constexpr double u_max = 25.0;
  static Eigen::Matrix4d A();
  static Eigen::Matrix<double, 4, 2> B();
  static Eigen::Matrix<double, 2, 4> C();
  /// {(a,b): |a| <= u_max, |b| <= u_max, ab = 0}
  static ConstraintSet control_set();
};

/// Null-reference tracking over horizon N, decision (x_1..x_N, u_0..u_{N-1}):
///   minimize sum_k |C x_{k+1}|^2 + |u_k / u_max|^2,  x_{k+1} = A x_k + B u_k,  u_k in U.
BenchmarkInstance build_afti16(Index N, const Eigen::Vector4d& x_init);

/// x0 ~ N(0, I) from the seeded generator, y0 = 0, z0 = proj_C(A x0).
AlmInit random_init(const GeoProblem& P, std::uint64_t seed);

struct MpcOptions {
  Index horizon = 10;
  Index steps = 100;
  bool warm = false;
  Eigen::Vector4d x_start = Eigen::Vector4d::Constant(10.0);
  /// Step at which the plant state is reset to x_start; negative disables.
  Index disturb_at = 50;
  AlmOptions solver;
  std::uint64_t seed = 1;
};

struct MpcRow {
  Index step = 0;
  double t_s = 0.0;
  Eigen::Vector4d x = Eigen::Vector4d::Zero();  ///< plant state when the control is computed
  Eigen::Vector2d u = Eigen::Vector2d::Zero();  ///< applied control
  double runtime_s = 0.0;
  AlmStatus status = AlmStatus::solved;
  bool warm = false;
  bool disturbed = false;
  bool solver_failed = false;
};

struct MpcTrace {
  std::vector<MpcRow> rows;
  Eigen::Vector4d final_state = Eigen::Vector4d::Zero();
  Index disturb_at = -1;
};

/// Closed-loop receding-horizon simulation with plant = prediction model.
MpcTrace mpc_simulate(const MpcOptions& opts);

}  // namespace geoqp
