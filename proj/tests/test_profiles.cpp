#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "geoqp/profiles.hpp"

using namespace geoqp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "geoqp_test_profiles";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunRecord rec(const std::string& setting, Index N, std::uint64_t seed, double t) {
  return RunRecord::make(setting, "p", N, seed, std::isinf(t) ? AlmStatus::time_limit : AlmStatus::solved,
                         t, 1, 1, 1);
}

}  // namespace

TEST_CASE("data profile examples") {
  const std::vector<double> v{1, 3, kInf};
  const StepProfile f = data_profile(v);
  CHECK(f(0.5) == 0.0);
  CHECK(f(2) == 1.0 / 3);
  CHECK(f(3) == 2.0 / 3);
  CHECK(f(1e6) == 2.0 / 3);
  CHECK(f.limit() == 2.0 / 3);
  const std::vector<double> fail{kInf, kInf};
  const StepProfile z = data_profile(fail);
  CHECK(z(0) == 0.0);
  CHECK(z(1e300) == 0.0);
  const std::vector<double> zero{0, 0, 0};
  const StepProfile o = data_profile(zero);
  CHECK(o(0) == 1.0);
  CHECK(o(5) == 1.0);
  CHECK_THROWS(data_profile(std::vector<double>{}));
}

TEST_CASE("data profile is order independent and nondecreasing") {
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v;
  for (int i = 0; i < 40; ++i) v.push_back(i % 7 == 0 ? kInf : e(rng));
  const StepProfile a = data_profile(v);
  std::shuffle(v.begin(), v.end(), rng);
  const StepProfile b = data_profile(v);
  CHECK(a.breakpoints() == b.breakpoints());
  double prev = 0.0;
  for (const auto& bp : a.breakpoints()) {
    CHECK(bp.fraction >= prev);
    prev = bp.fraction;
  }
  CHECK(a.limit() == 34.0 / 40);
}

TEST_CASE("extended ratios examples") {
  const std::vector<double> t3{1, 2, 4};
  const auto r = extended_ratios(t3);
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 2.0);
  CHECK(r[2] == 4.0);
  const std::vector<double> t2{5, kInf};
  const auto s = extended_ratios(t2);
  CHECK(s[0] == 0.0);
  CHECK(std::isinf(s[1]));
  const std::vector<double> same{3, 3, 3};
  for (double x : extended_ratios(same)) CHECK(x == 1.0);
  const std::vector<double> both_fail{kInf, kInf};
  for (double x : extended_ratios(both_fail)) CHECK(std::isinf(x));
  CHECK_THROWS(extended_ratios(std::vector<double>{1.0}));
}

TEST_CASE("performance profile and the two-solver reciprocal identity") {
  std::mt19937_64 rng(2);
  std::exponential_distribution<double> e(1.0);
  std::vector<RunRecord> records;
  for (std::uint64_t p = 0; p < 50; ++p) {
    records.push_back(rec("a", 8, p, p % 11 == 0 ? kInf : e(rng)));
    records.push_back(rec("b", 8, p, p % 13 == 0 ? kInf : e(rng)));
  }
  std::map<std::string, double> ta, tb;
  for (const auto& r : records) (r.setting == "a" ? ta : tb)[r.instance()] = r.runtime_s;
  bool identity = true;
  for (const auto& [inst, a] : ta) {
    const double b = tb[inst];
    if (std::isinf(a) || std::isinf(b)) continue;
    const std::vector<double> t{a, b};
    const auto r = extended_ratios(t);
    identity = identity && std::abs(r[0] * r[1] - 1.0) <= 4e-16;
  }
  CHECK(identity);
  const auto prof = performance_profile(records);
  REQUIRE(prof.size() == 2);
  // a fails on 5 instances (p = 0, 11, 22, 33, 44).
  CHECK(prof.at("a").limit() == 45.0 / 50);
  CHECK_THROWS(performance_profile({records[0]}));
}

TEST_CASE("percentiles and scalability") {
  CHECK(percentile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(percentile({1, 2, 3, 4, 5}, 0.25) == 2.0);
  CHECK(percentile({1, 2, 3, 4, 5}, 0.75) == 4.0);
  CHECK(std::isinf(percentile({1, kInf}, 0.5)));
  CHECK(std::isinf(percentile({1, kInf, kInf}, 0.5)));
  CHECK(percentile({7}, 0.25) == 7.0);

  std::vector<RunRecord> records;
  for (int i = 1; i <= 5; ++i) records.push_back(rec("s", 16, i, i));
  records.push_back(rec("s", 32, 1, 9));
  records.push_back(rec("s", 64, 1, 1));
  records.push_back(rec("s", 64, 2, kInf));
  const auto rows = scalability_profile(records);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].N == 16);
  CHECK(rows[0].median == 3.0);
  CHECK(rows[0].q25 == 2.0);
  CHECK(rows[0].q75 == 4.0);
  CHECK(rows[1].median == 9.0);
  CHECK(rows[1].q25 == 9.0);
  CHECK(rows[1].q75 == 9.0);
  CHECK(std::isinf(rows[2].median));
}

TEST_CASE("record invariant: runtime is inf iff not solved") {
  const RunRecord r = RunRecord::make("s", "p", 8, 1, AlmStatus::time_limit, 3.0, 1, 1, 1);
  CHECK(std::isinf(r.runtime_s));
  const RunRecord s = RunRecord::make("s", "p", 8, 1, AlmStatus::solved, 3.0, 1, 1, 1);
  CHECK(s.runtime_s == 3.0);
}

TEST_CASE("CSV emission and round trip") {
  const std::vector<double> v{1, 3, kInf};
  const auto path = temp_file("data.csv");
  emit_csv(data_profile(v), path);
  CHECK(slurp(path) == "t,fraction\n1,0.3333333333\n3,0.6666666667\n");
  const StepProfile back = parse_profile_csv(path);
  REQUIRE(back.breakpoints().size() == 2);
  CHECK(back.breakpoints()[0].t == 1.0);
  CHECK(back.breakpoints()[1].t == 3.0);
  CHECK(std::abs(back.breakpoints()[0].fraction - 1.0 / 3) <= 5e-11);

  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> g;
  std::vector<double> w;
  for (int i = 0; i < 25; ++i) w.push_back(g(rng));
  const auto p2 = temp_file("data2.csv");
  const StepProfile f = data_profile(w);
  emit_csv(f, p2);
  const StepProfile h = parse_profile_csv(p2);
  REQUIRE(h.breakpoints().size() == f.breakpoints().size());
  for (std::size_t i = 0; i < h.breakpoints().size(); ++i) {
    CHECK(h.breakpoints()[i].t == f.breakpoints()[i].t);
    CHECK(std::abs(h.breakpoints()[i].fraction - f.breakpoints()[i].fraction) <= 5e-11);
  }

  const auto empty = temp_file("empty.csv");
  emit_csv(StepProfile{}, empty);
  CHECK(slurp(empty) == "t,fraction\n");

  const auto sc = temp_file("scal.csv");
  emit_csv(std::vector<ScalabilityRow>{{"s", 8, 3, 2, kInf, 3}}, sc);
  CHECK(slurp(sc) == "N,median,q25,q75\n8,3,2,inf\n");
  CHECK(parse_number("inf") == kInf);
  CHECK(parse_number(format_number(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK_THROWS(parse_number("1.5x"));
  CHECK_THROWS(emit_csv(StepProfile{}, "/nonexistent-dir/x.csv"));
}

TEST_CASE("SVG output") {
  std::map<std::string, StepProfile> m;
  m.emplace("a", data_profile(std::vector<double>{0.1, 0.2, kInf}));
  m.emplace("b", data_profile(std::vector<double>{0.0, 0.3}));
  const auto path = temp_file("p.svg");
  emit_svg(m, "test", path);
  const std::string s = slurp(path);
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  CHECK(s.find("nan") == std::string::npos);
}
