#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "flows/backend.hpp"
#include "flows/flow.hpp"
#include "flows/trace.hpp"

namespace flows {

/// Backends reconstructed from a trace: every recorded backend_response is
/// served again, keyed by the hash of the request that produced it. Requests
/// that were never recorded fail with BackendError(not_found), which flows
/// surface as FlowError(replay_divergence).
struct ReplayBackends {
  std::shared_ptr<ScriptedBackend> store;
  /// Each recorded binding resolves to `store`, reporting the model it used.
  std::shared_ptr<BackendMap> resolver;
};

ReplayBackends replay_backend(const std::vector<TraceEvent>& events);
ReplayBackends replay_backend(const std::filesystem::path& trace_path);

/// The root flow's config and input message as recorded in a trace.
struct RecordedRun {
  FlowConfig config;
  Payload input;
  InstanceId created_by;
};

/// Throws std::runtime_error when the trace has no root flow_start/message_in.
RecordedRun recorded_run(const std::vector<TraceEvent>& events);

}  // namespace flows
