#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "flows/date.hpp"
#include "flows/ids.hpp"
#include "flows/value.hpp"

namespace flows {

enum class EventKind {
  flow_start,
  flow_end,
  message_in,
  message_out,
  backend_call,
  backend_response,
  state_update,
  warning,
};

const char* to_string(EventKind kind) noexcept;
/// Throws std::invalid_argument for unknown names.
EventKind event_kind_from_string(std::string_view name);

struct TraceEvent {
  std::uint64_t seq = 0;
  Timestamp timestamp{};
  InstanceId instance;
  EventKind kind = EventKind::warning;
  Value body = Value::object();

  Value to_value() const;
  static TraceEvent from_value(const Value& v);
};

/// First line of every trace file.
inline constexpr std::string_view kTraceFormat = "flows-trace";
inline constexpr int kTraceVersion = 1;

/// Append-only event log. Assigns strictly increasing sequence numbers
/// starting at 1; appends are serialized.
class TraceSink {
 public:
  virtual ~TraceSink() = default;

  void record(EventKind kind, const InstanceId& instance, Value body);

 protected:
  /// Called with the sink's lock held.
  virtual void write(const TraceEvent& event) = 0;

 private:
  std::mutex mutex_;
  std::uint64_t next_seq_ = 1;
};

class MemoryTraceSink final : public TraceSink {
 public:
  std::vector<TraceEvent> events() const;

 protected:
  void write(const TraceEvent& event) override;

 private:
  mutable std::mutex mutex_;
  std::vector<TraceEvent> events_;
};

/// One JSON event per line after a version header. Flushes to disk at every
/// flow_end. Write failures throw FlowError(trace_io).
class FileTraceSink final : public TraceSink {
 public:
  explicit FileTraceSink(const std::filesystem::path& path);

  const std::filesystem::path& path() const noexcept { return path_; }

 protected:
  void write(const TraceEvent& event) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Reads a trace file, validating the header and sequence monotonicity.
std::vector<TraceEvent> read_trace(const std::filesystem::path& path);

/// Normalized view used for trace equality: seq and timestamps dropped,
/// generated ids replaced by first-occurrence ordinals ("#1", "#2", ...),
/// "created_at" fields removed.
std::vector<Value> normalize_trace(const std::vector<TraceEvent>& events);

/// Index of the first differing normalized event, or nullopt if equal.
std::optional<std::size_t> first_trace_difference(const std::vector<Value>& a, const std::vector<Value>& b);

}  // namespace flows
