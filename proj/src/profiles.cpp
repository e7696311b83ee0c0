#include "geoqp/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace geoqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double budget_value(const RunRecord& r, Budget b) {
  if (r.status != AlmStatus::solved) return kInf;
  return b == Budget::runtime ? r.runtime_s : static_cast<double>(r.gradient_evaluations);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string fraction_text(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", f);
  return buf;
}

}  // namespace

RunRecord RunRecord::make(std::string setting, std::string problem, Index N, std::uint64_t seed,
                          AlmStatus status, double runtime_s, Index outer, Index inner,
                          Index grads) {
  RunRecord r;
  r.setting = std::move(setting);
  r.problem = std::move(problem);
  r.N = N;
  r.seed = seed;
  r.status = status;
  r.runtime_s = status == AlmStatus::solved ? runtime_s : kInf;
  r.outer_iterations = outer;
  r.inner_iterations = inner;
  r.gradient_evaluations = grads;
  return r;
}

std::string RunRecord::instance() const {
  return problem + "/" + std::to_string(N) + "/" + std::to_string(seed);
}

StepProfile::StepProfile(std::vector<Breakpoint> breakpoints) : breakpoints_(std::move(breakpoints)) {
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i].t > breakpoints_[i - 1].t) ||
        breakpoints_[i].fraction < breakpoints_[i - 1].fraction) {
      throw std::invalid_argument("StepProfile: breakpoints must be increasing in t and fraction");
    }
  }
}

double StepProfile::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                             [](double v, const Breakpoint& b) { return v < b.t; });
  if (it == breakpoints_.begin()) return 0.0;
  return std::prev(it)->fraction;
}

StepProfile data_profile(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("data_profile: empty set");
  std::vector<double> finite;
  for (double v : values)
    if (std::isfinite(v)) finite.push_back(v);
  std::sort(finite.begin(), finite.end());
  const double total = static_cast<double>(values.size());
  std::vector<Breakpoint> bps;
  for (std::size_t i = 0; i < finite.size(); ++i) {
    if (i + 1 < finite.size() && finite[i + 1] == finite[i]) continue;
    bps.push_back({finite[i], static_cast<double>(i + 1) / total});
  }
  return StepProfile(std::move(bps));
}

StepProfile data_profile(const std::vector<RunRecord>& records, Budget budget) {
  if (records.empty()) throw std::invalid_argument("data_profile: empty record set");
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) {
    if (r.setting != records.front().setting) {
      throw std::invalid_argument("data_profile: records from more than one setting");
    }
    values.push_back(budget_value(r, budget));
  }
  return data_profile(values);
}

std::vector<double> extended_ratios(std::span<const double> times) {
  if (times.size() < 2) throw std::invalid_argument("extended_ratios: need at least two solvers");
  std::vector<double> r(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    double best = kInf;
    for (std::size_t o = 0; o < times.size(); ++o)
      if (o != s) best = std::min(best, times[o]);
    const double t = times[s];
    if (std::isinf(t)) {
      r[s] = kInf;
    } else if (std::isinf(best)) {
      r[s] = 0.0;
    } else if (best == 0.0) {
      r[s] = t == 0.0 ? 1.0 : kInf;
    } else {
      r[s] = t / best;
    }
  }
  return r;
}

std::map<std::string, StepProfile> performance_profile(const std::vector<RunRecord>& records,
                                                       Budget budget) {
  std::set<std::string> settings;
  std::set<std::string> instances;
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& r : records) {
    settings.insert(r.setting);
    instances.insert(r.instance());
    value[{r.setting, r.instance()}] = budget_value(r, budget);
  }
  if (settings.size() < 2) throw std::invalid_argument("performance_profile: need >= 2 settings");
  const std::vector<std::string> names(settings.begin(), settings.end());
  std::map<std::string, std::vector<double>> ratios;
  std::vector<double> times(names.size());
  for (const auto& inst : instances) {
    for (std::size_t s = 0; s < names.size(); ++s) {
      auto it = value.find({names[s], inst});
      times[s] = it == value.end() ? kInf : it->second;
    }
    const std::vector<double> r = extended_ratios(times);
    for (std::size_t s = 0; s < names.size(); ++s) ratios[names[s]].push_back(r[s]);
  }
  std::map<std::string, StepProfile> out;
  for (const auto& [name, rs] : ratios) out.emplace(name, data_profile(rs));
  return out;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile: empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= values.size()) return values[lo];
  const double a = values[lo], b = values[lo + 1];
  if (std::isinf(a) || std::isinf(b)) return kInf;
  return a + frac * (b - a);
}

std::vector<ScalabilityRow> scalability_profile(const std::vector<RunRecord>& records) {
  std::map<std::pair<std::string, Index>, std::vector<double>> groups;
  for (const auto& r : records)
    groups[{r.setting, r.N}].push_back(r.status == AlmStatus::solved ? r.runtime_s : kInf);
  std::vector<ScalabilityRow> rows;
  for (const auto& [key, vals] : groups) {
    if (vals.empty()) {
      std::cerr << "scalability_profile: skipping empty group " << key.first << " N=" << key.second
                << "\n";
      continue;
    }
    ScalabilityRow row;
    row.setting = key.first;
    row.N = key.second;
    row.median = percentile(vals, 0.5);
    row.q25 = percentile(vals, 0.25);
    row.q75 = percentile(vals, 0.75);
    row.count = static_cast<Index>(vals.size());
    rows.push_back(row);
  }
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
  if (s == "inf" || s == "+inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

void emit_csv(const StepProfile& profile, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "t,fraction\n";
  for (const auto& b : profile.breakpoints())
    out << format_number(b.t) << ',' << fraction_text(b.fraction) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void emit_csv(const std::vector<ScalabilityRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "N,median,q25,q75\n";
  for (const auto& r : rows)
    out << r.N << ',' << format_number(r.median) << ',' << format_number(r.q25) << ','
        << format_number(r.q75) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

StepProfile parse_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "t,fraction") {
    throw std::runtime_error("'" + path.string() + "': missing 't,fraction' header");
  }
  std::vector<Breakpoint> bps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed profile row: " + line);
    bps.push_back({parse_number(line.substr(0, comma)), parse_number(line.substr(comma + 1))});
  }
  return StepProfile(std::move(bps));
}

void emit_svg(const std::map<std::string, StepProfile>& profiles, const std::string& title,
              const std::filesystem::path& path) {
  constexpr double W = 640, H = 400, L = 60, R = 180, T = 40, B = 50;
  double lo = kInf, hi = 0.0;
  for (const auto& [_, p] : profiles)
    for (const auto& b : p.breakpoints())
      if (b.t > 0.0 && std::isfinite(b.t)) {
        lo = std::min(lo, b.t);
        hi = std::max(hi, b.t);
      }
  if (!std::isfinite(lo)) lo = hi = 1.0;
  const double x0 = std::log10(lo) - 0.1, x1 = std::log10(hi) + 0.1 + (hi == lo ? 1.0 : 0.0);
  auto px = [&](double t) {
    const double lt = t > 0.0 ? std::log10(t) : x0;
    return L + (W - L - R) * (std::clamp(lt, x0, x1) - x0) / (x1 - x0);
  };
  auto py = [&](double f) { return T + (H - T - B) * (1.0 - f); };
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title
      << "</text>\n<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
      << "\" height=\"" << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << L << "\" y=\"" << H - 15 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << format_number(lo) << "</text>\n<text x=\"" << W - R - 40 << "\" y=\"" << H - 15
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(hi) << "</text>\n";
  std::size_t c = 0;
  for (const auto& [name, p] : profiles) {
    const char* color = colors[c % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << px(lo) << ','
        << py(0.0);
    double f = 0.0;
    for (const auto& b : p.breakpoints()) {
      if (!std::isfinite(b.t)) continue;
      out << ' ' << px(b.t) << ',' << py(f) << ' ' << px(b.t) << ',' << py(b.fraction);
      f = b.fraction;
    }
    out << ' ' << px(hi * 10.0) << ',' << py(f) << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (c + 1) << "\" fill=\"" << color
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << name << "</text>\n";
    ++c;
  }
  out << "</svg>\n";
}

}  // namespace geoqp
