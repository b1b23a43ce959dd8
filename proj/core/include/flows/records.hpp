#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flows/date.hpp"
#include "flows/value.hpp"

namespace flows {

/// Outcome of one (problem, variant) run.
struct RunRecord {
  std::string problem_id;
  std::string variant;
  bool solved = false;
  int rounds_used = 0;
  Date release_date{};
  std::string source;
  /// Rating as decimal text or the band name.
  std::string difficulty;
  std::string trace_ref;
  double wall_time = 0.0;
  /// Verdict of the final program on the hidden tests; empty when the run failed.
  std::string hidden_verdict;
  /// Flow invocations by role name (CodeGenerator, CodeCritic, ...).
  std::map<std::string, int> calls;
  std::optional<std::string> error;

  Value to_value() const;
  static RunRecord from_value(const Value& v);

  /// Equality ignoring wall_time.
  bool same_outcome(const RunRecord& other) const;
};

/// One canonical JSON record per line.
std::string record_line(const RunRecord& record);

/// Reads a records file; a missing file yields no records. A truncated final
/// line (interrupted write) is ignored.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Sorted by (problem_id, variant).
void sort_records(std::vector<RunRecord>& records);

}  // namespace flows
