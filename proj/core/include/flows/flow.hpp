#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "flows/errors.hpp"
#include "flows/message.hpp"
#include "flows/trace.hpp"

namespace flows {

class BackendResolver;
class ResponseCache;
class FlowRegistry;
struct BackendRequest;
namespace sandbox {
class Toolchain;
}

/// Plain-data description of a flow. Composite kinds nest child configs
/// under params.children.
struct FlowConfig {
  std::string name;
  std::string kind;
  std::vector<std::string> input_keys;
  std::vector<std::string> output_keys;
  Value params = Value::object();

  Value to_value() const;
  /// Throws ConfigError naming the offending field.
  static FlowConfig from_value(const Value& v);

  friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

FlowConfig load_flow_config(const std::string& path);

/// A flow's private key-value store. Only the owning Flow can obtain a
/// mutable reference.
class FlowState {
 public:
  const InstanceId& owner() const noexcept { return owner_; }
  const Payload& store() const noexcept { return store_; }

  bool contains(std::string_view key) const { return store_.find(key) != store_.end(); }
  const Value* find(std::string_view key) const;
  void set(std::string key, Value value) { store_.insert_or_assign(std::move(key), std::move(value)); }
  void erase(std::string_view key);
  void clear() noexcept { store_.clear(); }
  bool empty() const noexcept { return store_.empty(); }

 private:
  friend class Flow;
  explicit FlowState(InstanceId owner) : owner_(std::move(owner)) {}

  InstanceId owner_;
  Payload store_;
};

/// Console used by human-in-the-loop flows.
struct Console {
  std::istream* in = nullptr;
  std::ostream* out = nullptr;
};

/// Services a run may use. Everything is borrowed; null members mean the
/// service is unavailable (a null trace sink discards events).
struct RunContext {
  TraceSink* trace = nullptr;
  BackendResolver* backends = nullptr;
  ResponseCache* cache = nullptr;
  const sandbox::Toolchain* toolchain = nullptr;
  const FlowRegistry* registry = nullptr;
  Console console{};

  /// Current nesting depth; maintained by Flow::run.
  int depth = 0;

  void emit(EventKind kind, const InstanceId& instance, Value body) const;

  /// Resolves `binding`, consults the cache, records backend_call and
  /// backend_response events, and returns the completion text.
  std::string complete(const std::string& binding, const BackendRequest& request, const InstanceId& caller) const;

  const FlowRegistry& flow_registry() const;
};

/// States of a whole instance tree keyed by instance id.
using StateSnapshot = std::map<InstanceId, Payload>;

/// Result of a flow's step: the output payload plus any message ids that the
/// output derives from besides the input (composites add child outputs).
struct StepOutput {
  StepOutput(Payload p) : payload(std::move(p)) {}  // NOLINT(google-explicit-constructor)
  StepOutput(Payload p, std::vector<MessageId> extra) : payload(std::move(p)), extra_parents(std::move(extra)) {}

  Payload payload;
  std::vector<MessageId> extra_parents;
};

/// A self-contained computational unit with isolated state. run() checks the
/// input/output key contracts, records trace events, and delegates to step().
class Flow {
 public:
  explicit Flow(FlowConfig config);
  virtual ~Flow() = default;

  Flow(const Flow&) = delete;
  Flow& operator=(const Flow&) = delete;

  const FlowConfig& config() const noexcept { return config_; }
  const InstanceId& instance_id() const noexcept { return state_.owner(); }

  /// Processes one message. Not re-entrant.
  Message run(const Message& input, RunContext& ctx);

  /// Empties this flow's state and, recursively, its children's.
  void reset_state();

  virtual std::span<const std::unique_ptr<Flow>> children() const noexcept { return {}; }

  /// Read-only copy of the states in this instance tree, for diagnostics.
  StateSnapshot snapshot_state() const;

 protected:
  virtual StepOutput step(const Message& input, RunContext& ctx) = 0;

  const FlowState& state() const noexcept { return state_; }
  /// Writes this flow's state and records a state_update event.
  void put_state(RunContext& ctx, std::string key, Value value);

 private:
  FlowConfig config_;
  FlowState state_;
  bool running_ = false;
};

using FlowPtr = std::unique_ptr<Flow>;

}  // namespace flows
