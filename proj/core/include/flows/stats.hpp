#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flows/date.hpp"
#include "flows/records.hpp"

namespace flows {

/// Percentages in [0, 100].
struct SolveRate {
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;

  double half_width() const noexcept { return (ci_high - ci_low) / 2.0; }

  friend bool operator==(const SolveRate&, const SolveRate&) = default;
};

inline constexpr std::uint64_t kDefaultBootstrapSeed = 42;
inline constexpr int kDefaultResamples = 1000;
inline constexpr double kDefaultLevel = 0.95;

/// Point estimate only (ci_low = ci_high = point). Throws std::invalid_argument
/// on empty input.
SolveRate pass_at_1(const std::vector<bool>& outcomes);
SolveRate pass_at_1(const std::vector<RunRecord>& records);

/// Percentile bootstrap. Each resample draws n indices with
/// Xoshiro256(seed).below(n); resampled rates are sorted and the
/// (1-level)/2 and 1-(1-level)/2 quantiles are read with linear
/// interpolation between order statistics (h = (R-1)q).
std::pair<double, double> bootstrap_ci(const std::vector<bool>& outcomes, int resamples = kDefaultResamples,
                                       double level = kDefaultLevel, std::uint64_t seed = kDefaultBootstrapSeed);

/// pass_at_1 plus the bootstrap interval, widened if needed to contain the point.
SolveRate solve_rate(const std::vector<bool>& outcomes, int resamples = kDefaultResamples,
                     double level = kDefaultLevel, std::uint64_t seed = kDefaultBootstrapSeed);

struct TemporalPoint {
  Date window_start{};
  /// Exclusive: first day of the month after the window.
  Date window_end{};
  SolveRate rate;

  friend bool operator==(const TemporalPoint&, const TemporalPoint&) = default;
};

struct DatedOutcome {
  Date date{};
  bool solved = false;
};

/// Windows [start, start + span) months, starting from the month span-1
/// before the earliest record and advancing by `step` months while the window
/// still overlaps the latest record. Empty windows are omitted.
/// Throws std::invalid_argument for span < 1 or step < 1.
std::vector<TemporalPoint> sliding_window(const std::vector<DatedOutcome>& outcomes, int span_months = 2,
                                          int step_months = 1, std::uint64_t seed = kDefaultBootstrapSeed);
std::vector<TemporalPoint> sliding_window(const std::vector<RunRecord>& records, int span_months = 2,
                                          int step_months = 1, std::uint64_t seed = kDefaultBootstrapSeed);

/// "series,window_start,window_end,n,point,ci_low,ci_high" with numbers in
/// shortest round-trip form.
struct LabeledSeries {
  std::string label;
  std::vector<TemporalPoint> points;

  friend bool operator==(const LabeledSeries&, const LabeledSeries&) = default;
};

std::string series_to_csv(const std::vector<LabeledSeries>& series);
/// Throws std::invalid_argument naming the line on malformed input.
std::vector<LabeledSeries> series_from_csv(std::string_view csv);

/// Shortest text that parses back to the same double.
std::string shortest_number(double v);

}  // namespace flows
