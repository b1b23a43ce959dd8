#include "flows/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "flows/rng.hpp"

namespace flows {

SolveRate pass_at_1(const std::vector<bool>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("pass@1 of an empty record set");
  const auto solved = static_cast<double>(std::count(outcomes.begin(), outcomes.end(), true));
  const double point = 100.0 * solved / static_cast<double>(outcomes.size());
  return {point, point, point, outcomes.size()};
}

SolveRate pass_at_1(const std::vector<RunRecord>& records) {
  std::vector<bool> outcomes;
  for (const auto& r : records) outcomes.push_back(r.solved);
  return pass_at_1(outcomes);
}

std::pair<double, double> bootstrap_ci(const std::vector<bool>& outcomes, int resamples, double level,
                                       std::uint64_t seed) {
  if (outcomes.empty()) throw std::invalid_argument("bootstrap of an empty sample");
  if (resamples < 1) throw std::invalid_argument("resamples must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const std::size_t n = outcomes.size();
  Xoshiro256 rng(seed);
  std::vector<double> rates(static_cast<std::size_t>(resamples));
  for (auto& rate : rates) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += outcomes[rng.below(n)] ? 1 : 0;
    rate = 100.0 * static_cast<double>(hits) / static_cast<double>(n);
  }
  std::sort(rates.begin(), rates.end());
  auto quantile = [&](double q) {
    const double h = static_cast<double>(rates.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, rates.size() - 1);
    return rates[lo] + (h - static_cast<double>(lo)) * (rates[hi] - rates[lo]);
  };
  const double alpha = (1.0 - level) / 2.0;
  return {quantile(alpha), quantile(1.0 - alpha)};
}

SolveRate solve_rate(const std::vector<bool>& outcomes, int resamples, double level, std::uint64_t seed) {
  SolveRate r = pass_at_1(outcomes);
  const auto [lo, hi] = bootstrap_ci(outcomes, resamples, level, seed);
  r.ci_low = std::min(lo, r.point);
  r.ci_high = std::max(hi, r.point);
  return r;
}

std::vector<TemporalPoint> sliding_window(const std::vector<DatedOutcome>& outcomes, int span_months,
                                          int step_months, std::uint64_t seed) {
  if (span_months < 1) throw std::invalid_argument("window span must be at least one month");
  if (step_months < 1) throw std::invalid_argument("window step must be at least one month");
  std::vector<TemporalPoint> out;
  if (outcomes.empty()) return out;
  auto [min_it, max_it] = std::minmax_element(outcomes.begin(), outcomes.end(),
                                              [](const DatedOutcome& a, const DatedOutcome& b) { return a.date < b.date; });
  const Date last = first_of_month(max_it->date);
  for (Date start = add_months(min_it->date, -(span_months - 1)); start <= last; start = add_months(start, step_months)) {
    const Date end = add_months(start, span_months);
    std::vector<bool> in_window;
    for (const auto& o : outcomes) {
      if (o.date >= start && o.date < end) in_window.push_back(o.solved);
    }
    if (in_window.empty()) continue;
    out.push_back({start, end, solve_rate(in_window, kDefaultResamples, kDefaultLevel, seed)});
  }
  return out;
}

std::vector<TemporalPoint> sliding_window(const std::vector<RunRecord>& records, int span_months, int step_months,
                                          std::uint64_t seed) {
  std::vector<DatedOutcome> outcomes;
  for (const auto& r : records) outcomes.push_back({r.release_date, r.solved});
  return sliding_window(outcomes, span_months, step_months, seed);
}

std::string shortest_number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::invalid_argument("cannot format number");
  return std::string(buf, end);
}

namespace {

constexpr std::string_view kSeriesHeader = "series,window_start,window_end,n,point,ci_low,ci_high";

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto c = line.find(',', pos);
    out.push_back(line.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t lineno) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw std::invalid_argument("series line " + std::to_string(lineno) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string series_to_csv(const std::vector<LabeledSeries>& series) {
  std::string out(kSeriesHeader);
  out += '\n';
  for (const auto& s : series) {
    if (s.label.find_first_of(",\"\n") != std::string::npos) {
      throw std::invalid_argument("series label '" + s.label + "' must not contain commas, quotes or newlines");
    }
    for (const auto& p : s.points) {
      out += s.label + ',' + format_date(p.window_start) + ',' + format_date(p.window_end) + ',' +
             std::to_string(p.rate.n) + ',' + shortest_number(p.rate.point) + ',' + shortest_number(p.rate.ci_low) +
             ',' + shortest_number(p.rate.ci_high) + '\n';
    }
  }
  return out;
}

std::vector<LabeledSeries> series_from_csv(std::string_view csv) {
  std::vector<LabeledSeries> out;
  std::size_t pos = 0;
  std::size_t lineno = 0;
  bool header = true;
  while (pos < csv.size()) {
    const auto nl = csv.find('\n', pos);
    const auto line = csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    ++lineno;
    if (header) {
      if (line != kSeriesHeader) throw std::invalid_argument("series line 1: unexpected header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_commas(line);
    if (f.size() != 7) throw std::invalid_argument("series line " + std::to_string(lineno) + ": expected 7 fields");
    TemporalPoint p;
    try {
      p.window_start = parse_date(f[1]);
      p.window_end = parse_date(f[2]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("series line " + std::to_string(lineno) + ": " + e.what());
    }
    p.rate.n = static_cast<std::size_t>(parse_double(f[3], lineno));
    p.rate.point = parse_double(f[4], lineno);
    p.rate.ci_low = parse_double(f[5], lineno);
    p.rate.ci_high = parse_double(f[6], lineno);
    if (out.empty() || out.back().label != f[0]) out.push_back({std::string(f[0]), {}});
    out.back().points.push_back(p);
  }
  if (header) throw std::invalid_argument("series csv is empty");
  return out;
}

}  // namespace flows
