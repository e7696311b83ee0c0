#include "geoqp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <iostream>
#include <map>
#include <fstream>
#include <thread>

#include "geoqp/io.hpp"

namespace geoqp::cli {

namespace fs = std::filesystem;

fs::path default_output_dir() {
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  return "geoqp-out";
}

std::string SolverSetting::id() const { return to_string(formulation) + "/" + to_string(subsolver); }

std::string SolverSetting::file_tag() const {
  std::string s = id();
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

std::vector<SolverSetting> all_settings() {
  std::vector<SolverSetting> out;
  for (Formulation f : {Formulation::extended, Formulation::condensed_soft, Formulation::condensed_hard})
    for (Subsolver s : {Subsolver::nmpg, Subsolver::panoc}) out.push_back({f, s});
  return out;
}

namespace {

BenchmarkInstance build_instance(const RunPlan& plan, Index N) {
  if (plan.benchmark == "ivp") return build_ivp(N);
  if (plan.benchmark == "obstacle") return build_obstacle(N);
  if (plan.benchmark == "afti16") return build_afti16(N, Eigen::Vector4d::Constant(10.0));
  if (plan.benchmark == "file") {
    if (!plan.problem_file) throw std::invalid_argument("benchmark 'file' needs --problem");
    BenchmarkInstance inst;
    inst.problem = io::read_problem(*plan.problem_file);
    inst.name = plan.problem_file->stem().string();
    inst.N = 0;
    inst.layout = {{"x", 0, inst.problem.n()}};
    return inst;
  }
  throw std::invalid_argument("unknown benchmark '" + plan.benchmark + "'");
}

struct Cell {
  Index N;
  std::uint64_t seed;
  SolverSetting setting;
};

RunRecord run_cell(const RunPlan& plan, const Cell& cell, std::string& error) {
  const BenchmarkInstance inst = build_instance(plan, cell.N);
  AlmOptions opts = plan.options;
  opts.formulation = cell.setting.formulation;
  opts.subsolver = cell.setting.subsolver;
  const AlmInit init = random_init(inst.problem, cell.seed);
  try {
    const AlmResult r = alm_solve(inst.problem, opts, init);
    return RunRecord::make(cell.setting.id(), inst.name, cell.N, cell.seed, r.status, r.elapsed_s,
                           static_cast<Index>(r.history.size()), r.inner_iterations,
                           r.gradient_evaluations);
  } catch (const std::exception& e) {
    error = e.what();
    return RunRecord::make(cell.setting.id(), inst.name, cell.N, cell.seed,
                           AlmStatus::iteration_cap, 0.0, 0, 0, 0);
  }
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& tokens) {
  std::vector<std::uint64_t> out;
  for (const auto& t : tokens) {
    const auto dots = t.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoull(t));
      continue;
    }
    const std::uint64_t a = std::stoull(t.substr(0, dots)), b = std::stoull(t.substr(dots + 2));
    if (b < a) throw std::invalid_argument("empty seed range '" + t + "'");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  }
  return out;
}

std::vector<SolverSetting> parse_settings(const std::string& formulation,
                                          const std::string& subsolver) {
  std::vector<SolverSetting> out;
  for (const auto& s : all_settings()) {
    if (formulation != "all" && io::parse_formulation(formulation) != s.formulation) continue;
    if (subsolver != "all" && io::parse_subsolver(subsolver) != s.subsolver) continue;
    out.push_back(s);
  }
  return out;
}

io::Json options_json(const AlmOptions& o) {
  return io::Json{{"eps_d", o.eps_d},       {"eps_p", o.eps_p},
                  {"kappa_V", o.kappa_V},   {"kappa_eps", o.kappa_eps},
                  {"kappa_mu", o.kappa_mu}, {"kappa_rho", o.kappa_rho},
                  {"eps_1", o.eps_1},       {"mu_1", o.mu_1},
                  {"rho_1", o.rho_1},       {"y_max", o.y_max},
                  {"time_limit", o.time_limit_s}, {"max_outer", o.max_outer},
                  {"mu_floor", o.mu_floor}, {"max_iterations", o.inner.max_iterations},
                  {"window", o.inner.window}, {"memory", o.inner.lbfgs_memory},
                  {"max_backtracks", o.inner.max_backtracks}};
}

}  // namespace

std::vector<RunRecord> run_sweep(const RunPlan& plan) {
  std::vector<Cell> cells;
  for (Index N : plan.sizes)
    for (std::uint64_t seed : plan.seeds)
      for (const auto& s : plan.settings) cells.push_back({N, seed, s});
  std::vector<RunRecord> records(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) records[i] = run_cell(plan, cells[i], errors[i]);
  };
  const int jobs = std::clamp(plan.jobs, 1, 256);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!errors[i].empty())
      std::cerr << "cell " << records[i].setting << " " << records[i].instance() << ": " << errors[i]
                << "\n";
  return records;
}

int cmd_bench(const RunPlan& plan, std::ostream& log) {
  if (plan.settings.empty()) throw std::invalid_argument("bench: no solver settings selected");
  plan.options.check();
  fs::create_directories(plan.out_dir);
  const std::vector<RunRecord> records = run_sweep(plan);

  io::write_runs_csv(records, plan.out_dir / "runs.csv", true);
  io::write_runs_csv(records, plan.out_dir / "runs_untimed.csv", false);

  std::map<std::string, std::vector<RunRecord>> by_setting;
  for (const auto& r : records) by_setting[r.setting].push_back(r);
  std::map<std::string, std::string> tags;
  for (const auto& s : plan.settings) tags[s.id()] = s.file_tag();

  std::map<std::string, StepProfile> data_rt;
  for (const auto& [id, recs] : by_setting) {
    data_rt[id] = data_profile(recs, Budget::runtime);
    emit_csv(data_rt[id], plan.out_dir / ("data_profile_" + tags[id] + ".csv"));
    emit_csv(data_profile(recs, Budget::gradient_evaluations),
             plan.out_dir / ("data_profile_grad_" + tags[id] + ".csv"));
    emit_csv(scalability_profile(recs), plan.out_dir / ("scalability_" + tags[id] + ".csv"));
  }
  emit_svg(data_rt, plan.benchmark + ": data profile (runtime, s)",
           plan.out_dir / "data_profile.svg");
  if (by_setting.size() >= 2) {
    const auto perf = performance_profile(records, Budget::runtime);
    for (const auto& [id, p] : perf) emit_csv(p, plan.out_dir / ("perf_profile_" + tags[id] + ".csv"));
    for (const auto& [id, p] : performance_profile(records, Budget::gradient_evaluations))
      emit_csv(p, plan.out_dir / ("perf_profile_grad_" + tags[id] + ".csv"));
    emit_svg(perf, plan.benchmark + ": performance profile (runtime ratio)",
             plan.out_dir / "perf_profile.svg");
  }

  io::Json settings = io::Json::array();
  for (const auto& s : plan.settings) settings.push_back(s.id());
  io::Json manifest{{"tool", "geoqp"},
                    {"version", kVersion},
                    {"benchmark", plan.benchmark},
                    {"sizes", plan.sizes},
                    {"seeds", plan.seeds},
                    {"settings", settings},
                    {"jobs", plan.jobs},
                    {"options", options_json(plan.options)},
                    {"records", io::records_to_json(records)}};
  if (plan.problem_file) manifest["problem_file"] = plan.problem_file->string();
  io::write_json(manifest, plan.out_dir / "manifest.json");

  std::size_t solved = 0;
  for (const auto& r : records) solved += r.status == AlmStatus::solved;
  log << "bench " << plan.benchmark << ": " << solved << "/" << records.size()
      << " cells solved; results in " << plan.out_dir.string() << "\n";
  return 0;
}

int cmd_solve(const fs::path& problem, const AlmOptions& options, std::uint64_t seed,
              const fs::path& out_dir, std::ostream& log) {
  GeoProblem P;
  try {
    P = io::read_problem(problem);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const ValidationReport report = validate(P);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "invalid problem: " << v << "\n";
    return 1;
  }
  const AlmResult r = alm_solve(P, options, random_init(P, seed));
  fs::create_directories(out_dir);
  io::write_json(io::solution_to_json(r, options), out_dir / "solution.json");
  io::write_history_csv(r.history, out_dir / "history.csv");
  log << "status " << to_string(r.status) << " after " << r.history.size() << " outer / "
      << r.inner_iterations << " inner iterations, " << r.elapsed_s << " s\n";
  return exit_code(r.status);
}

int cmd_mpc(const MpcOptions& options, const fs::path& out_dir, std::ostream& log) {
  fs::create_directories(out_dir);
  std::map<std::string, MpcTrace> traces;
  for (bool warm : {false, true}) {
    MpcOptions o = options;
    o.warm = warm;
    traces[warm ? "warm" : "cold"] = mpc_simulate(o);
    io::write_mpc_csv(traces[warm ? "warm" : "cold"], out_dir / (warm ? "mpc_warm.csv" : "mpc_cold.csv"));
  }
  std::ofstream out(out_dir / "mpc_runtime.csv");
  if (!out) throw std::runtime_error("cannot write mpc_runtime.csv");
  out << "mode,steps,median_runtime_s,mean_runtime_s,max_runtime_s,failures\n";
  std::map<std::string, double> medians;
  for (const auto& [mode, tr] : traces) {
    std::vector<double> rt;
    std::size_t failures = 0;
    for (const auto& r : tr.rows) {
      rt.push_back(r.runtime_s);
      failures += r.solver_failed;
    }
    double mean = 0.0;
    for (double v : rt) mean += v;
    mean /= static_cast<double>(rt.size());
    medians[mode] = percentile(rt, 0.5);
    out << mode << ',' << rt.size() << ',' << format_number(medians[mode]) << ','
        << format_number(mean) << ',' << format_number(*std::max_element(rt.begin(), rt.end()))
        << ',' << failures << '\n';
  }
  log << "median step runtime: cold " << medians["cold"] << " s, warm " << medians["warm"] << " s\n";
  if (medians["warm"] > medians["cold"]) log << "note: warm start was not faster than cold start\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Augmented Lagrangian solver for QPs with geometric constraints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // Precedence: built-in defaults, then --config, then individual flags.
  std::optional<std::string> formulation, subsolver;
  std::optional<double> eps_d, eps_p, time_limit;
  std::string out_dir;
  std::string config;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--formulation", formulation,
                  "extended | condensed-soft | condensed-hard (bench: also all)");
    c->add_option("--subsolver", subsolver, "nmpg | panoc (bench: also all)");
    c->add_option("--eps-d", eps_d, "dual tolerance [1e-6]");
    c->add_option("--eps-p", eps_p, "primal tolerance [1e-6]");
    c->add_option("--time-limit", time_limit, "seconds per solve [100]");
    c->add_option("--config", config, "JSON file with option overrides");
    c->add_option("--out", out_dir, std::string("output directory (default $") + kOutputEnv +
                                        " or ./geoqp-out)");
  };

  auto* solve = app.add_subcommand("solve", "solve a problem file");
  std::string problem_file;
  std::uint64_t seed = 1;
  solve->add_option("problem", problem_file, "problem JSON")->required();
  solve->add_option("--seed", seed, "seed for the random initial point")->capture_default_str();
  add_common(solve);

  auto* bench = app.add_subcommand("bench", "run a benchmark sweep and write profiles");
  RunPlan plan;
  std::vector<std::string> seed_tokens{"1..10"};
  bench->add_option("--benchmark", plan.benchmark, "ivp | obstacle | afti16 | file")
      ->capture_default_str();
  bench->add_option("--problem", problem_file, "problem JSON for --benchmark file");
  bench->add_option("--sizes", plan.sizes, "problem sizes N [8,16]")->delimiter(',');
  bench->add_option("--seeds", seed_tokens, "seeds, e.g. 1..10 or 1,4,9 [1..10]")->delimiter(',');
  bench->add_option("--jobs", plan.jobs, "concurrent cells")->capture_default_str();
  add_common(bench);

  auto* mpc = app.add_subcommand("mpc", "closed-loop AFTI-16 simulation, cold and warm");
  MpcOptions mopts;
  mpc->add_option("--horizon", mopts.horizon, "prediction horizon")->capture_default_str();
  mpc->add_option("--steps", mopts.steps, "simulation steps")->capture_default_str();
  mpc->add_option("--disturb-at", mopts.disturb_at, "reset step, negative disables")
      ->capture_default_str();
  mpc->add_option("--seed", mopts.seed, "seed base for cold starts")->capture_default_str();
  add_common(mpc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    AlmOptions opts;
    // The closed-loop study runs nmpg on the condensed-hard formulation.
    if (mpc->parsed()) opts.subsolver = Subsolver::nmpg;
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw io::ParseError("cannot open config '" + config + "'");
      io::Json j;
      try {
        j = io::Json::parse(in);
      } catch (const io::Json::parse_error& e) {
        throw io::ParseError("config '" + config + "': " + e.what());
      }
      io::apply_config(j, opts);
    }
    if (eps_d) opts.eps_d = *eps_d;
    if (eps_p) opts.eps_p = *eps_p;
    if (time_limit) opts.time_limit_s = *time_limit;
    const fs::path out = out_dir.empty() ? default_output_dir() : fs::path(out_dir);

    if (bench->parsed()) {
      opts.check();
      plan.out_dir = out;
      plan.seeds = parse_seeds(seed_tokens);
      plan.options = opts;
      plan.settings = parse_settings(formulation.value_or("all"), subsolver.value_or("all"));
      if (!problem_file.empty()) plan.problem_file = problem_file;
      if (plan.benchmark == "file") plan.sizes = {0};
      return cmd_bench(plan, std::cout);
    }
    if (formulation) opts.formulation = io::parse_formulation(*formulation);
    if (subsolver) opts.subsolver = io::parse_subsolver(*subsolver);
    opts.check();
    if (solve->parsed()) return cmd_solve(problem_file, opts, seed, out, std::cout);
    mopts.solver = opts;
    return cmd_mpc(mopts, out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace geoqp::cli
