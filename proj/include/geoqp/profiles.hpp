#pragma once

// Data, extended performance and scalability profiles over solver runs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "geoqp/alm.hpp"

namespace geoqp {

struct RunRecord {
  std::string setting;  ///< e.g. "condensed-hard/panoc"
  std::string problem;  ///< benchmark name
  Index N = 0;
  std::uint64_t seed = 0;
  double runtime_s = std::numeric_limits<double>::infinity();  ///< inf unless solved
  AlmStatus status = AlmStatus::iteration_cap;
  Index outer_iterations = 0;
  Index inner_iterations = 0;
  Index gradient_evaluations = 0;

  /// Builds a record with runtime forced to inf when the status is not solved.
  static RunRecord make(std::string setting, std::string problem, Index N, std::uint64_t seed,
                        AlmStatus status, double runtime_s, Index outer, Index inner, Index grads);

  /// Identifies the problem instance across settings: "problem/N/seed".
  std::string instance() const;
};

struct Breakpoint {
  double t = 0.0;
  double fraction = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

/// Right-continuous nondecreasing step function on [0, inf), zero before the
/// first breakpoint.
class StepProfile {
public:
  StepProfile() = default;
  explicit StepProfile(std::vector<Breakpoint> breakpoints);

  double operator()(double t) const;
  const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
  /// Value as t -> inf.
  double limit() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back().fraction; }

private:
  std::vector<Breakpoint> breakpoints_;
};

/// f(t) = |{p : t_p <= t}| / |P|; infinite entries count as failures.
StepProfile data_profile(std::span<const double> values);

/// Budget measure used to build profiles from run records.
enum class Budget { runtime, gradient_evaluations };

/// Data profile of one setting. Throws on an empty set or mixed settings.
StepProfile data_profile(const std::vector<RunRecord>& records, Budget budget = Budget::runtime);

/// Extended ratios for one problem: r_s = t_s / min_{s' != s} t_{s'}.
/// inf/inf -> inf, finite/inf -> 0, 0/0 -> 1. Requires at least two entries.
std::vector<double> extended_ratios(std::span<const double> times);

/// Per-setting distribution of extended ratios over the instances seen by any
/// setting; an instance missing for a setting counts as a failure.
std::map<std::string, StepProfile> performance_profile(const std::vector<RunRecord>& records,
                                                       Budget budget = Budget::runtime);

/// Type-7 percentile (p in [0,1]) with inf ordered last; interpolating toward
/// an infinite order statistic yields inf.
double percentile(std::vector<double> values, double p);

struct ScalabilityRow {
  std::string setting;
  Index N = 0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  Index count = 0;
};

/// Median and quartiles of the runtime per (setting, N), sorted by setting then N.
std::vector<ScalabilityRow> scalability_profile(const std::vector<RunRecord>& records);

/// Shortest decimal that round-trips; "inf" for +infinity.
std::string format_number(double v);
double parse_number(const std::string& s);

/// Rows "t,fraction" with the fraction printed to 10 decimals.
void emit_csv(const StepProfile& profile, const std::filesystem::path& path);
/// Rows "N,median,q25,q75".
void emit_csv(const std::vector<ScalabilityRow>& rows, const std::filesystem::path& path);
StepProfile parse_profile_csv(const std::filesystem::path& path);

/// Minimal SVG step plot of several profiles on a log10 horizontal axis.
void emit_svg(const std::map<std::string, StepProfile>& profiles, const std::string& title,
              const std::filesystem::path& path);

}  // namespace geoqp
