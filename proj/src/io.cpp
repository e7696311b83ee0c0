#include "geoqp/io.hpp"

#include <cmath>
#include <fstream>

namespace geoqp::io {

namespace {

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ParseError(what + ": expected a number");
}

VectorXd read_vector(const Json& j, const std::string& what, bool allow_inf = false) {
  if (!j.is_array()) throw ParseError(what + ": expected an array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = read_number(j[i], what);
    if (!allow_inf && !std::isfinite(v[static_cast<Index>(i)])) {
      throw ParseError(what + ": non-finite entry");
    }
  }
  return v;
}

Json vector_json(const VectorXd& v, bool allow_inf = false) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(allow_inf ? number_or_inf(v[i]) : Json(v[i]));
  return a;
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

Index read_index(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ParseError(what + ": expected a nonnegative integer");
  }
  return static_cast<Index>(j.get<long long>());
}

Json triplet_json(const SparseMatrix& M) {
  Json rows = Json::array(), cols = Json::array(), vals = Json::array();
  for (Index k = 0; k < M.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      rows.push_back(it.row());
      cols.push_back(it.col());
      vals.push_back(it.value());
    }
  return Json{{"rows", rows}, {"cols", cols}, {"vals", vals}};
}

SparseMatrix read_matrix(const Json& j, Index rows, Index cols, const std::string& what) {
  std::vector<Eigen::Triplet<double>> t;
  if (j.is_array()) {
    if (static_cast<Index>(j.size()) != rows) throw ParseError(what + ": wrong number of rows");
    for (Index i = 0; i < rows; ++i) {
      const VectorXd r = read_vector(j[static_cast<std::size_t>(i)], what);
      if (r.size() != cols) throw ParseError(what + ": wrong number of columns");
      for (Index c = 0; c < cols; ++c)
        if (r[c] != 0.0) t.emplace_back(i, c, r[c]);
    }
  } else if (j.is_object()) {
    const Json& jr = field(j, "rows", what);
    const Json& jc = field(j, "cols", what);
    const Json& jv = field(j, "vals", what);
    if (!jr.is_array() || !jc.is_array() || !jv.is_array() || jr.size() != jc.size() ||
        jr.size() != jv.size()) {
      throw ParseError(what + ": rows, cols, vals must be arrays of equal length");
    }
    for (std::size_t k = 0; k < jr.size(); ++k) {
      const Index r = read_index(jr[k], what + ".rows");
      const Index c = read_index(jc[k], what + ".cols");
      if (r >= rows || c >= cols) throw ParseError(what + ": index out of range");
      const double v = read_number(jv[k], what + ".vals");
      if (!std::isfinite(v)) throw ParseError(what + ": non-finite entry");
      t.emplace_back(r, c, v);
    }
  } else {
    throw ParseError(what + ": expected a dense array or a triplet object");
  }
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  M.makeCompressed();
  return M;
}

std::vector<ConstraintSet> read_children(const Json& j, const std::string& where) {
  const Json& c = field(j, "children", where);
  if (!c.is_array() || c.empty()) throw ParseError(where + ": 'children' must be a nonempty array");
  std::vector<ConstraintSet> out;
  for (const auto& child : c) out.push_back(set_from_json(child));
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

Json set_to_json(const ConstraintSet& C) {
  using K = ConstraintSet::Kind;
  Json j{{"kind", C.kind_name()}};
  switch (C.kind()) {
    case K::Zero:
    case K::Nonneg: j["dim"] = C.dim(); break;
    case K::Box:
      j["lo"] = vector_json(C.lower(), true);
      j["hi"] = vector_json(C.upper(), true);
      break;
    case K::Complementarity:
    case K::Switching:
    case K::Vanishing:
    case K::EitherOr: break;
    case K::UnionOfConvex:
    case K::Product: {
      Json children = Json::array();
      for (const auto& c : C.children()) children.push_back(set_to_json(c));
      j["children"] = children;
      break;
    }
    case K::Translate:
      j["offset"] = vector_json(C.offset());
      j["inner"] = set_to_json(C.inner());
      break;
    case K::Scale:
      j["factors"] = vector_json(C.factors());
      j["inner"] = set_to_json(C.inner());
      break;
  }
  return j;
}

ConstraintSet set_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("set: expected an object");
  const Json& jk = field(j, "kind", "set");
  if (!jk.is_string()) throw ParseError("set: 'kind' must be a string");
  const std::string kind = jk.get<std::string>();
  const std::string where = "set '" + kind + "'";
  try {
    if (kind == "zero") return ConstraintSet::zero(read_index(field(j, "dim", where), where));
    if (kind == "nonneg") return ConstraintSet::nonneg(read_index(field(j, "dim", where), where));
    if (kind == "box") {
      return ConstraintSet::box(read_vector(field(j, "lo", where), where + ".lo", true),
                                read_vector(field(j, "hi", where), where + ".hi", true));
    }
    if (kind == "cc") return ConstraintSet::complementarity();
    if (kind == "sc") return ConstraintSet::switching();
    if (kind == "vc") return ConstraintSet::vanishing();
    if (kind == "eoc") return ConstraintSet::either_or();
    if (kind == "union") return ConstraintSet::union_of_convex(read_children(j, where));
    if (kind == "product") return ConstraintSet::product(read_children(j, where));
    if (kind == "translate") {
      return ConstraintSet::translate(set_from_json(field(j, "inner", where)),
                                      read_vector(field(j, "offset", where), where + ".offset"));
    }
    if (kind == "scale") {
      return ConstraintSet::scale(set_from_json(field(j, "inner", where)),
                                  read_vector(field(j, "factors", where), where + ".factors"));
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
  throw ParseError("set: unknown kind '" + kind + "'");
}

Json problem_to_json(const GeoProblem& P) {
  Json j{{"n", P.n()},
         {"m", P.m()},
         {"Q", triplet_json(P.cost.Q)},
         {"q", vector_json(P.cost.q)},
         {"A", triplet_json(P.A)},
         {"C", set_to_json(P.C)}};
  if (P.has_equalities()) {
    j["A_eq"] = triplet_json(*P.A_eq);
    j["b_eq"] = vector_json(*P.b_eq);
  }
  return j;
}

GeoProblem problem_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("problem: expected a JSON object");
  const Index n = read_index(field(j, "n", "problem"), "n");
  const Index m = read_index(field(j, "m", "problem"), "m");
  GeoProblem P;
  P.cost.Q = read_matrix(field(j, "Q", "problem"), n, n, "Q");
  P.cost.q = read_vector(field(j, "q", "problem"), "q");
  if (P.cost.q.size() != n) throw ParseError("q: expected length n");
  P.A = read_matrix(field(j, "A", "problem"), m, n, "A");
  P.C = set_from_json(field(j, "C", "problem"));
  if (P.C.dim() != m) throw ParseError("C: dimension differs from m");
  const bool has_aeq = j.contains("A_eq"), has_beq = j.contains("b_eq");
  if (has_aeq != has_beq) throw ParseError("A_eq and b_eq must be given together");
  if (has_aeq) {
    P.b_eq = read_vector(j["b_eq"], "b_eq");
    P.A_eq = read_matrix(j["A_eq"], P.b_eq->size(), n, "A_eq");
  }
  return P;
}

GeoProblem read_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
  return problem_from_json(j);
}

void write_problem(const GeoProblem& P, const std::filesystem::path& path) {
  write_json(problem_to_json(P), path);
}

Formulation parse_formulation(const std::string& s) {
  if (s == "extended") return Formulation::extended;
  if (s == "condensed-soft") return Formulation::condensed_soft;
  if (s == "condensed-hard") return Formulation::condensed_hard;
  throw ParseError("unknown formulation '" + s + "'");
}

Subsolver parse_subsolver(const std::string& s) {
  if (s == "nmpg") return Subsolver::nmpg;
  if (s == "panoc") return Subsolver::panoc;
  throw ParseError("unknown subsolver '" + s + "'");
}

void apply_config(const Json& j, AlmOptions& o) {
  if (!j.is_object()) throw ParseError("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    auto num = [&] { return read_number(v, "config." + key); };
    auto count = [&] { return read_index(v, "config." + key); };
    if (key == "formulation") o.formulation = parse_formulation(v.get<std::string>());
    else if (key == "subsolver") o.subsolver = parse_subsolver(v.get<std::string>());
    else if (key == "eps_d") o.eps_d = num();
    else if (key == "eps_p") o.eps_p = num();
    else if (key == "time_limit") o.time_limit_s = num();
    else if (key == "max_outer") o.max_outer = count();
    else if (key == "kappa_V") o.kappa_V = num();
    else if (key == "kappa_eps") o.kappa_eps = num();
    else if (key == "kappa_mu") o.kappa_mu = num();
    else if (key == "kappa_rho") o.kappa_rho = num();
    else if (key == "eps_1") o.eps_1 = num();
    else if (key == "mu_1") o.mu_1 = num();
    else if (key == "rho_1") o.rho_1 = num();
    else if (key == "y_max") o.y_max = num();
    else if (key == "mu_floor") o.mu_floor = num();
    else if (key == "max_iterations") o.inner.max_iterations = count();
    else if (key == "window") o.inner.window = static_cast<int>(count());
    else if (key == "memory") o.inner.lbfgs_memory = static_cast<int>(count());
    else if (key == "max_backtracks") o.inner.max_backtracks = static_cast<int>(count());
    else if (key == "armijo") o.inner.armijo = num();
    else if (key == "tau_halvings") o.inner.tau_halvings = static_cast<int>(count());
    else throw ParseError("config: unknown key '" + key + "'");
  }
}

Json solution_to_json(const AlmResult& r, const AlmOptions& opts) {
  Json j{{"status", to_string(r.status)},
         {"exit_code", exit_code(r.status)},
         {"mu_final", r.mu_final},
         {"x", vector_json(r.triple.x)},
         {"z", vector_json(r.triple.z)},
         {"y", vector_json(r.triple.y)},
         {"outer_iterations", r.history.size()},
         {"inner_iterations", r.inner_iterations},
         {"gradient_evaluations", r.gradient_evaluations},
         {"factorizations", r.factorizations},
         {"elapsed_s", r.elapsed_s},
         {"formulation", to_string(opts.formulation)},
         {"subsolver", to_string(opts.subsolver)}};
  if (r.triple.y_eq) j["y_eq"] = vector_json(*r.triple.y_eq);
  return j;
}

void write_json(const Json& j, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_history_csv(const std::vector<AlmHistoryRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "k,rho,mu,eps,E,V,inner_iters,grad_evals,elapsed_s,status\n";
  for (const auto& h : rows) {
    out << h.k << ',' << format_number(h.rho) << ',' << format_number(h.mu) << ','
        << format_number(h.eps) << ',' << format_number(h.E) << ',' << format_number(h.V) << ','
        << h.inner_iterations << ',' << h.gradient_evaluations << ',' << format_number(h.elapsed_s)
        << ',' << to_string(h.inner_status) << '\n';
  }
}

void write_mpc_csv(const MpcTrace& trace, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "step,t_s,x1,x2,x3,x4,u1,u2,runtime_s,status,warm,disturbed\n";
  for (const auto& r : trace.rows) {
    out << r.step << ',' << format_number(r.t_s);
    for (int i = 0; i < 4; ++i) out << ',' << format_number(r.x[i]);
    out << ',' << format_number(r.u[0]) << ',' << format_number(r.u[1]) << ','
        << format_number(r.runtime_s) << ','
        << (r.solver_failed ? "failed:" + to_string(r.status) : to_string(r.status)) << ','
        << (r.warm ? 1 : 0) << ',' << (r.disturbed ? 1 : 0) << '\n';
  }
}

void write_runs_csv(const std::vector<RunRecord>& records, const std::filesystem::path& path,
                    bool include_timing) {
  std::ofstream out = open_out(path);
  out << "setting,problem,N,seed,status,outer_iters,inner_iters,grad_evals";
  out << (include_timing ? ",runtime_s\n" : "\n");
  for (const auto& r : records) {
    out << r.setting << ',' << r.problem << ',' << r.N << ',' << r.seed << ','
        << to_string(r.status) << ',' << r.outer_iterations << ',' << r.inner_iterations << ','
        << r.gradient_evaluations;
    if (include_timing) out << ',' << format_number(r.runtime_s);
    out << '\n';
  }
}

Json records_to_json(const std::vector<RunRecord>& records) {
  Json a = Json::array();
  for (const auto& r : records) {
    a.push_back(Json{{"setting", r.setting},
                     {"problem", r.problem},
                     {"N", r.N},
                     {"seed", r.seed},
                     {"status", to_string(r.status)},
                     {"runtime_s", number_or_inf(r.runtime_s)},
                     {"outer_iterations", r.outer_iterations},
                     {"inner_iterations", r.inner_iterations},
                     {"gradient_evaluations", r.gradient_evaluations}});
  }
  return a;
}

}  // namespace geoqp::io
