#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <fstream>

#include <flows/grid.hpp>
#include <flows/rng.hpp>
#include <flows/stats.hpp>
#include <flows/table.hpp>

#include "test_support.hpp"

namespace flows {
namespace {

using testing::fixture_dir;
using testing::read_file;
using testing::TempDir;

const Value& oracle() {
  static const Value v = Value::parse(read_file(fixture_dir() / "stats" / "bootstrap_oracle.json"));
  return v;
}

std::vector<bool> outcomes_of(const std::string& bits) {
  std::vector<bool> out;
  for (char c : bits) out.push_back(c == '1');
  return out;
}

std::vector<bool> repeat(bool value, std::size_t n) { return std::vector<bool>(n, value); }

TEST(Rng, MatchesReferenceStream) {
  Xoshiro256 rng(0);
  for (const auto& expected : oracle().at("xoshiro_seed0_first")) {
    EXPECT_EQ(std::to_string(rng()), expected.get<std::string>());
  }
}

TEST(Rng, BelowStaysInRange) {
  Xoshiro256 rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(PassAt1, Examples) {
  EXPECT_DOUBLE_EQ(pass_at_1(repeat(true, 10)).point, 100.0);
  EXPECT_DOUBLE_EQ(pass_at_1(repeat(false, 10)).point, 0.0);
  std::vector<bool> v = repeat(false, 67);
  std::fill(v.begin(), v.begin() + 18, true);
  EXPECT_EQ(std::round(pass_at_1(v).point * 10) / 10, 26.9);
  EXPECT_THROW(pass_at_1(std::vector<bool>{}), std::invalid_argument);
}

TEST(Bootstrap, MatchesFrozenOracle) {
  for (const auto& [name, c] : oracle().at("cases").items()) {
    const auto [lo, hi] = bootstrap_ci(outcomes_of(c.at("outcomes").get<std::string>()));
    EXPECT_NEAR(lo, c.at("ci_low").get<double>(), 0.05) << name;
    EXPECT_NEAR(hi, c.at("ci_high").get<double>(), 0.05) << name;
  }
}

TEST(Bootstrap, HalfOfThirtyNearNormalWidth) {
  const auto v = outcomes_of(oracle().at("cases").at("half_30").at("outcomes").get<std::string>());
  const auto [lo, hi] = bootstrap_ci(v, 1000, 0.95, 42);
  EXPECT_LT(lo, 50.0);
  EXPECT_GT(hi, 50.0);
  const double normal = 2 * 1.96 * std::sqrt(0.25 / 30) * 100;
  EXPECT_NEAR(hi - lo, normal, 0.25 * normal);
}

TEST(Bootstrap, DegenerateVectorsHaveZeroWidth) {
  EXPECT_EQ(bootstrap_ci(repeat(true, 20)), std::make_pair(100.0, 100.0));
  EXPECT_EQ(bootstrap_ci(repeat(false, 20)), std::make_pair(0.0, 0.0));
}

TEST(Bootstrap, WidthScalesWithInverseRootN) {
  const auto& cases = oracle().at("cases");
  const auto r50 = solve_rate(outcomes_of(cases.at("bern_50").at("outcomes").get<std::string>()));
  const auto r200 = solve_rate(outcomes_of(cases.at("bern_200").at("outcomes").get<std::string>()));
  const double ratio = (r50.ci_high - r50.ci_low) / (r200.ci_high - r200.ci_low);
  EXPECT_GE(ratio, 1.6);
  EXPECT_LE(ratio, 2.4);
}

TEST(Bootstrap, DeterministicAndValidated) {
  const auto v = outcomes_of("1101001110");
  EXPECT_EQ(bootstrap_ci(v, 500, 0.9, 3), bootstrap_ci(v, 500, 0.9, 3));
  EXPECT_THROW(bootstrap_ci(v, 1000, 1.0, 42), std::invalid_argument);
  EXPECT_THROW(bootstrap_ci(v, 1000, 0.0, 42), std::invalid_argument);
  EXPECT_THROW(bootstrap_ci(v, 0, 0.95, 42), std::invalid_argument);
}

TEST(Bootstrap, IntervalAlwaysContainsPoint) {
  Xoshiro256 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<bool> v(1 + rng.below(40));
    for (auto&& x : v) x = rng.below(4) == 0;
    const auto r = solve_rate(v, 200, 0.95, trial);
    EXPECT_LE(r.ci_low, r.point);
    EXPECT_GE(r.ci_high, r.point);
    EXPECT_GE(r.ci_low, 0.0);
    EXPECT_LE(r.ci_high, 100.0);
  }
}

DatedOutcome at(const std::string& date, bool solved) { return {parse_date(date), solved}; }

TEST(SlidingWindow, SingleMonth) {
  const auto pts = sliding_window(std::vector<DatedOutcome>{at("2021-03-05", true), at("2021-03-20", false)});
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(format_date(pts[0].window_start), "2021-02-01");
  EXPECT_EQ(format_date(pts[0].window_end), "2021-04-01");
  EXPECT_EQ(format_date(pts[1].window_start), "2021-03-01");
  EXPECT_EQ(pts[0].rate, pts[1].rate);
  EXPECT_DOUBLE_EQ(pts[0].rate.point, 50.0);
}

TEST(SlidingWindow, EmptyWindowsOmitted) {
  const auto pts = sliding_window(std::vector<DatedOutcome>{at("2021-01-10", true), at("2021-07-10", false)});
  std::vector<std::string> starts;
  for (const auto& p : pts) starts.push_back(format_date(p.window_start));
  EXPECT_EQ(starts, (std::vector<std::string>{"2020-12-01", "2021-01-01", "2021-06-01", "2021-07-01"}));
}

TEST(SlidingWindow, SpanAndStep) {
  EXPECT_THROW(sliding_window(std::vector<DatedOutcome>{at("2021-01-01", true)}, 0), std::invalid_argument);
  const auto pts = sliding_window(std::vector<DatedOutcome>{at("2021-01-01", true), at("2021-12-01", true)}, 3, 2);
  for (const auto& p : pts) EXPECT_EQ(p.window_end, add_months(p.window_start, 3));
  EXPECT_TRUE(sliding_window(std::vector<DatedOutcome>{}).empty());
}

TEST(SlidingWindow, DropAcrossCutoff) {
  std::vector<DatedOutcome> v;
  for (int m = 0; m < 12; ++m) {
    const Date month = add_months(parse_date("2021-03-01"), m);
    const bool post = !(month < kDefaultCutoff);
    for (int i = 0; i < 20; ++i) v.push_back({month, post ? i % 4 == 0 : i % 5 != 0});
  }
  const auto pts = sliding_window(v);
  for (const auto& p : pts) {
    if (p.window_end <= kDefaultCutoff) EXPECT_DOUBLE_EQ(p.rate.point, 80.0);
    if (!(p.window_start < kDefaultCutoff)) EXPECT_DOUBLE_EQ(p.rate.point, 25.0);
  }
}

TEST(Series, CsvRoundTrip) {
  std::vector<LabeledSeries> s{
      {"Code", sliding_window(std::vector<DatedOutcome>{at("2021-01-10", true), at("2021-02-10", false)})},
      {"Code_Debug", sliding_window(std::vector<DatedOutcome>{at("2021-05-10", true)})}};
  const auto csv = series_to_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "series,window_start,window_end,n,point,ci_low,ci_high");
  EXPECT_EQ(series_from_csv(csv), s);
  EXPECT_THROW(series_from_csv("series,window_start\nx,y\n"), std::invalid_argument);
  EXPECT_EQ(shortest_number(0.1), "0.1");
  EXPECT_EQ(std::stod(shortest_number(100.0 / 3)), 100.0 / 3);
}

SolveRate rate(double point, double half) { return {point, point - half, point + half, 50}; }

TEST(Cells, Grammar) {
  EXPECT_EQ(baseline_cell(rate(71.8, 11.0)), "71.8 ±11.0");
  EXPECT_EQ(delta_cell(rate(81.1, 9.7), rate(71.8, 11.0)), "+9.3 ±9.7");
  EXPECT_EQ(delta_cell(rate(71.8, 10.6), rate(71.8, 11.0)), "+0.0 ±10.6");
  EXPECT_EQ(delta_cell(rate(71.78, 10.6), rate(71.8, 11.0)), "+0.0 ±10.6");
  EXPECT_EQ(delta_cell(rate(70.2, 8.4), rate(71.8, 11.0)), "-1.6 ±8.4");
}

RateTable synthetic_table() {
  RateTable t;
  t.variants = {"Code", "Code_Reflection", "Plan_Oracle-Code"};
  t.columns = {{"Pre-cutoff", "Codeforces"}, {"Pre-cutoff", "LeetCode easy"}, {"Post-cutoff", "Codeforces"}};
  t.cells[{"Code", 0}] = rate(71.8, 11.0);
  t.cells[{"Code", 1}] = rate(90.0, 6.1);
  t.cells[{"Code", 2}] = rate(26.9, 10.4);
  t.cells[{"Code_Reflection", 0}] = rate(81.1, 9.7);
  t.cells[{"Code_Reflection", 1}] = rate(90.0, 6.0);
  t.cells[{"Code_Reflection", 2}] = rate(25.3, 10.1);
  t.cells[{"Plan_Oracle-Code", 0}] = rate(80.0, 9.5);
  t.cells[{"Plan_Oracle-Code", 2}] = rate(30.0, 11.2);
  return t;
}

TEST(Table, RendersBaselineDeltasAndAbsentCells) {
  EXPECT_EQ(render_results_table(synthetic_table(), "Code"),
            "                  Pre-cutoff                 Post-cutoff\n"
            "Variant           Codeforces  LeetCode easy  Codeforces\n"
            "--------------------------------------------------------\n"
            "Code              71.8 ±11.0  90.0 ±6.1      26.9 ±10.4\n"
            "Code_Reflection   +9.3 ±9.7   +0.0 ±6.0      -1.6 ±10.1\n"
            "Plan_Oracle-Code  +8.2 ±9.5   --             +3.1 ±11.2\n");
}

TEST(Table, Errors) {
  EXPECT_THROW(render_results_table(synthetic_table(), "Plan-Code"), TableError);
  auto t = synthetic_table();
  t.cells.erase({"Code", 1});
  EXPECT_THROW(render_results_table(t, "Code"), TableError);
}

TEST(Table, CsvCarriesCells) {
  const auto csv = render_results_csv(synthetic_table(), "Code");
  EXPECT_NE(csv.find("Code_Reflection,Pre-cutoff,Codeforces,50,81.1,"), std::string::npos);
  EXPECT_NE(csv.find("Plan_Oracle-Code,Pre-cutoff,LeetCode easy,,,,,--\n"), std::string::npos);
}

TEST(Table, PureFunction) {
  EXPECT_EQ(render_results_table(synthetic_table(), "Code"), render_results_table(synthetic_table(), "Code"));
}

RunRecord record(std::string pid, std::string variant, bool solved, std::string date, std::string source = "codeforces",
                 std::string difficulty = "800") {
  RunRecord r;
  r.problem_id = std::move(pid);
  r.variant = std::move(variant);
  r.solved = solved;
  r.rounds_used = 1;
  r.release_date = parse_date(date);
  r.source = std::move(source);
  r.difficulty = std::move(difficulty);
  r.trace_ref = r.problem_id + "/" + r.variant + "/trace.log";
  r.calls = {{"CodeGenerator", 1}};
  return r;
}

TEST(RatesFromRecords, ColumnsAndGroups) {
  std::vector<RunRecord> rs{record("a", "Code", true, "2021-01-01"),
                            record("b", "Code", false, "2022-01-01"),
                            record("c", "Code", true, "2021-01-01", "leetcode", "hard"),
                            record("d", "Code", true, "2021-01-01", "leetcode", "easy")};
  const auto plain = rates_from_records(rs, {"Code", "Code_Debug"}, std::nullopt);
  ASSERT_EQ(plain.columns.size(), 3u);
  EXPECT_EQ(plain.columns[0].name, "Codeforces");
  EXPECT_EQ(plain.columns[1].name, "LeetCode easy");
  EXPECT_EQ(plain.columns[2].name, "LeetCode hard");
  EXPECT_DOUBLE_EQ(plain.find("Code", 0)->point, 50.0);
  EXPECT_EQ(plain.find("Code_Debug", 0), nullptr);

  const auto split = rates_from_records(rs, {"Code"}, kDefaultCutoff);
  ASSERT_EQ(split.columns.size(), 6u);
  EXPECT_EQ(split.columns[0].group, "Pre-cutoff");
  EXPECT_EQ(split.columns[3].group, "Post-cutoff");
  EXPECT_DOUBLE_EQ(split.find("Code", 0)->point, 100.0);
  EXPECT_DOUBLE_EQ(split.find("Code", 3)->point, 0.0);
  EXPECT_EQ(split.find("Code", 4), nullptr);
}

TEST(Records, LineRoundTripAndTruncatedTail) {
  TempDir dir;
  auto a = record("a", "Code", true, "2021-01-01");
  auto b = record("b", "Code_Debug", false, "2021-02-01");
  b.error = "backend: queue_exhausted";
  {
    std::ofstream out(dir / "r.jsonl");
    out << record_line(a) << "\n" << record_line(b) << "\n" << record_line(a).substr(0, 20);
  }
  const auto rs = read_records(dir / "r.jsonl");
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].same_outcome(a));
  EXPECT_TRUE(rs[1].same_outcome(b));
  EXPECT_TRUE(read_records(dir / "missing.jsonl").empty());
  EXPECT_EQ(record_line(a).find('\n'), std::string::npos);
}

// ---- grid -----------------------------------------------------------------

struct CountingFactory {
  std::shared_ptr<std::atomic<int>> created = std::make_shared<std::atomic<int>>(0);
  std::string broken_problem;

  BackendFactory factory() const {
    return [created = created, broken = broken_problem](const Problem& p, const FlowVariant&) {
      ++*created;
      if (p.id == broken) return std::shared_ptr<BackendResolver>(std::make_shared<BackendMap>());
      auto set = std::shared_ptr<testing::ScriptedSet>(testing::cc6_backends(p.id));
      return std::shared_ptr<BackendResolver>(set, &set->map);
    };
  }
};

std::vector<Problem> first_problems(std::size_t n) {
  auto ps = load_problems(fixture_dir() / "cc6" / "problems");
  ps.resize(n);
  return ps;
}

GridSettings grid_settings(const TempDir& dir, const CountingFactory& f) {
  static const auto toolchain = sandbox::Toolchain::defaults();
  GridSettings s;
  s.backends = f.factory();
  s.toolchain = &toolchain;
  s.out_dir = dir.path();
  s.variant.limits.wall_time = std::chrono::seconds(5);
  return s;
}

TEST(Grid, TwoByTwo) {
  TempDir dir;
  CountingFactory f;
  const auto variants = std::vector<FlowVariant>{parse_variant("Code"), parse_variant("Code_Debug")};
  const auto result = evaluate_grid(first_problems(2), variants, grid_settings(dir, f));
  EXPECT_EQ(result.records.size(), 4u);
  EXPECT_EQ(result.new_runs, 4u);
  EXPECT_EQ(read_records(dir / std::string(kRecordsFile)).size(), 4u);
  EXPECT_TRUE(std::filesystem::exists(dir / "P1" / "Code_Debug" / "trace.log"));
  for (const auto& r : result.records) EXPECT_FALSE(r.error.has_value()) << *r.error;
}

TEST(Grid, ResumeRunsOnlyMissingPairs) {
  TempDir dir;
  CountingFactory f;
  const auto variants = std::vector<FlowVariant>{parse_variant("Code"), parse_variant("Code_Reflection")};
  evaluate_grid(first_problems(2), variants, grid_settings(dir, f));
  const auto path = dir / std::string(kRecordsFile);
  const auto lines = read_file(path);
  std::ofstream(path, std::ios::trunc) << lines.substr(0, lines.rfind('\n', lines.size() - 2) + 1);
  ASSERT_EQ(read_records(path).size(), 3u);

  CountingFactory again;
  const auto result = evaluate_grid(first_problems(2), variants, grid_settings(dir, again));
  EXPECT_EQ(result.new_runs, 1u);
  EXPECT_EQ(*again.created, 1);
  EXPECT_EQ(result.records.size(), 4u);
  EXPECT_EQ(read_records(path).size(), 4u);
}

TEST(Grid, BackendFailureIsRecordedNotFatal) {
  TempDir dir;
  CountingFactory f;
  f.broken_problem = "P2";
  const auto result = evaluate_grid(first_problems(2), {parse_variant("Code")}, grid_settings(dir, f));
  ASSERT_EQ(result.records.size(), 2u);
  EXPECT_FALSE(result.records[0].error.has_value());
  ASSERT_TRUE(result.records[1].error.has_value());
  EXPECT_FALSE(result.records[1].solved);
  EXPECT_NE(result.records[1].error->find("backend"), std::string::npos);
}

TEST(Grid, WorkersDoNotChangeRecords) {
  TempDir serial_dir;
  TempDir parallel_dir;
  CountingFactory f;
  const auto problems = first_problems(3);
  const auto variants = std::vector<FlowVariant>{parse_variant("Code"), parse_variant("Code_Debug"),
                                                 parse_variant("Plan-Code")};
  auto serial = grid_settings(serial_dir, f);
  auto parallel = grid_settings(parallel_dir, f);
  parallel.workers = 4;
  const auto a = evaluate_grid(problems, variants, serial).records;
  const auto b = evaluate_grid(problems, variants, parallel).records;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].same_outcome(b[i])) << a[i].problem_id << a[i].variant;
}

TEST(Grid, RejectsBadSettings) {
  TempDir dir;
  CountingFactory f;
  auto s = grid_settings(dir, f);
  s.workers = 0;
  EXPECT_THROW(evaluate_grid({}, {}, s), std::invalid_argument);
  s.workers = 1;
  s.backends = nullptr;
  EXPECT_THROW(evaluate_grid({}, {}, s), std::invalid_argument);
}

}  // namespace
}  // namespace flows
