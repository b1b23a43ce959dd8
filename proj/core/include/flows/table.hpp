#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flows/date.hpp"
#include "flows/records.hpp"
#include "flows/stats.hpp"

namespace flows {

struct TableColumn {
  /// Optional header spanning consecutive columns ("Pre-cutoff").
  std::string group;
  std::string name;

  friend bool operator==(const TableColumn&, const TableColumn&) = default;
};

/// Solve rates by (variant, column index). Rows and columns keep their order.
struct RateTable {
  std::vector<std::string> variants;
  std::vector<TableColumn> columns;
  std::map<std::pair<std::string, std::size_t>, SolveRate> cells;

  const SolveRate* find(const std::string& variant, std::size_t column) const;
};

class TableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "71.8 ±11.0"
std::string baseline_cell(const SolveRate& rate);
/// "+9.3 ±9.7"; a delta that rounds to zero renders as "+0.0".
std::string delta_cell(const SolveRate& rate, const SolveRate& baseline);
inline constexpr std::string_view kAbsentCell = "--";

/// Aligned plain text. The baseline row shows absolute rates, every other
/// row signed deltas against the baseline. Throws TableError when the
/// baseline row is missing or lacks a cell another row has.
std::string render_results_table(const RateTable& table, const std::string& baseline);

/// variant,group,column,n,point,ci_low,ci_high,cell
std::string render_results_csv(const RateTable& table, const std::string& baseline);

/// Columns: one per source ("Codeforces", "LeetCode <band>") and, when a
/// cutoff is given, grouped into "Pre-cutoff" and "Post-cutoff". Rows follow
/// `variants` (variants without records are kept and render absent cells).
RateTable rates_from_records(const std::vector<RunRecord>& records, const std::vector<std::string>& variants,
                             std::optional<Date> cutoff, std::uint64_t seed = kDefaultBootstrapSeed);

}  // namespace flows
