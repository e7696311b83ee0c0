#pragma once

// File formats: problem and solution JSON, iteration logs, MPC traces, run lists.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoqp/alm.hpp"
#include "geoqp/benchmarks.hpp"
#include "geoqp/problem.hpp"
#include "geoqp/profiles.hpp"

namespace geoqp::io {

using Json = nlohmann::json;

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Tagged tree, e.g. {"kind":"translate","offset":[0,-1],"inner":{"kind":"cc"}}.
/// Box bounds are numbers or the strings "inf" / "-inf".
Json set_to_json(const ConstraintSet& C);
ConstraintSet set_from_json(const Json& j);

/// Fields n, m, Q, q, A, C and optionally A_eq, b_eq. Matrices are triplet
/// objects {rows, cols, vals} (zero-based); Q may also be a dense array of rows.
Json problem_to_json(const GeoProblem& P);
GeoProblem problem_from_json(const Json& j);

GeoProblem read_problem(const std::filesystem::path& path);
void write_problem(const GeoProblem& P, const std::filesystem::path& path);

/// Overrides AlmOptions fields from a flat configuration object. Recognized
/// keys: formulation, subsolver, eps_d, eps_p, time_limit, max_outer, kappa_V,
/// kappa_eps, kappa_mu, kappa_rho, eps_1, mu_1, rho_1, y_max, mu_floor,
/// max_iterations, window, memory, max_backtracks, armijo, tau_halvings.
/// Unknown keys are rejected.
void apply_config(const Json& j, AlmOptions& opts);

Formulation parse_formulation(const std::string& s);
Subsolver parse_subsolver(const std::string& s);

Json solution_to_json(const AlmResult& r, const AlmOptions& opts);
void write_json(const Json& j, const std::filesystem::path& path);

/// k,rho,mu,eps,E,V,inner_iters,grad_evals,elapsed_s,status
void write_history_csv(const std::vector<AlmHistoryRow>& rows, const std::filesystem::path& path);

/// step,t_s,x1,x2,x3,x4,u1,u2,runtime_s,status,warm,disturbed
void write_mpc_csv(const MpcTrace& trace, const std::filesystem::path& path);

/// One row per record. Without timing the runtime column is omitted, so the
/// file depends only on seeds and options.
void write_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path,
                    bool include_timing);
Json records_to_json(const std::vector<RunRecord>& records);

}  // namespace geoqp::io
