#pragma once

// Command implementations behind the geoqp executable.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "geoqp/alm.hpp"
#include "geoqp/benchmarks.hpp"
#include "geoqp/profiles.hpp"

namespace geoqp::cli {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "GEOQP_OUT";

std::filesystem::path default_output_dir();

struct SolverSetting {
  Formulation formulation = Formulation::condensed_hard;
  Subsolver subsolver = Subsolver::panoc;

  /// "formulation/subsolver", e.g. "condensed-hard/panoc".
  std::string id() const;
  /// id() with '/' replaced by '_' for file names.
  std::string file_tag() const;
};

/// {extended, condensed-soft, condensed-hard} x {nmpg, panoc}.
std::vector<SolverSetting> all_settings();

struct RunPlan {
  std::string benchmark = "ivp";  ///< ivp | obstacle | afti16 | file
  std::optional<std::filesystem::path> problem_file;  ///< for benchmark == "file"
  std::vector<Index> sizes{8, 16};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<SolverSetting> settings = all_settings();
  AlmOptions options;  ///< formulation and subsolver are taken from each setting
  std::filesystem::path out_dir;
  int jobs = 1;
};

/// Solves every (setting, size, seed) cell. Records come back in plan order
/// (size, seed, setting) regardless of `jobs`. Cell failures are recorded,
/// not raised.
std::vector<RunRecord> run_sweep(const RunPlan& plan);

/// Sweep plus manifest.json, runs.csv, runs_untimed.csv and the profile CSVs.
int cmd_bench(const RunPlan& plan, std::ostream& log);

/// Solves a problem file from random_init(P, seed); writes solution.json and
/// history.csv into out_dir. Returns the status exit code, 1 on bad input.
int cmd_solve(const std::filesystem::path& problem, const AlmOptions& options,
              std::uint64_t seed, const std::filesystem::path& out_dir, std::ostream& log);

/// Cold and warm closed-loop runs; writes mpc_cold.csv, mpc_warm.csv and
/// mpc_runtime.csv.
int cmd_mpc(const MpcOptions& options, const std::filesystem::path& out_dir, std::ostream& log);

/// Parses argv and dispatches to a command.
int run(int argc, char** argv);

}  // namespace geoqp::cli
