#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flows/backend.hpp"
#include "flows/cache.hpp"
#include "flows/cc_flows.hpp"
#include "flows/dataset.hpp"
#include "flows/records.hpp"

namespace flows {

/// Supplies the backends for one (problem, variant) run. Called from worker
/// threads.
using BackendFactory = std::function<std::shared_ptr<BackendResolver>(const Problem&, const FlowVariant&)>;

struct GridSettings {
  VariantSettings variant;
  BackendFactory backends;
  ResponseCache* cache = nullptr;
  const sandbox::Toolchain* toolchain = nullptr;
  /// Receives records.jsonl and <problem_id>/<variant>/trace.log files.
  std::filesystem::path out_dir;
  std::size_t workers = 1;
  bool resume = true;
  /// Used by interactive oracle plans; only meaningful with one worker.
  Console console{};
  /// Progress callback, invoked under the writer lock.
  std::function<void(const RunRecord&)> on_record;
};

inline constexpr std::string_view kRecordsFile = "records.jsonl";

/// <out_dir>/<problem_id>/<variant>/trace.log
std::filesystem::path trace_path(const std::filesystem::path& out_dir, const std::string& problem_id,
                                 const std::string& variant);

struct RunOutcome {
  RunRecord record;
  /// Final extracted program; empty when the run failed before producing one.
  std::string program;
  std::optional<FlowErrorKind> error_kind;
};

/// Runs one variant on one problem, writes its trace, and judges the final
/// program on the hidden tests. Flow and sandbox failures are folded into the
/// record (solved = false, error set); nothing is thrown for them.
RunOutcome run_single(const Problem& problem, const FlowVariant& variant, const GridSettings& settings);

struct GridResult {
  /// Every requested pair, persisted earlier or run now, sorted.
  std::vector<RunRecord> records;
  std::size_t new_runs = 0;
};

/// Runs every (problem, variant) pair not already persisted (when resuming),
/// appending one record per completed run. Throws std::invalid_argument for
/// zero workers or a missing backend factory.
GridResult evaluate_grid(const std::vector<Problem>& problems, const std::vector<FlowVariant>& variants,
                         const GridSettings& settings);

}  // namespace flows
