#include "flows/flow.hpp"

#include <fstream>
#include <set>

#include "flows/trace.hpp"

namespace flows {

ConfigError::ConfigError(Kind kind, std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), kind_(kind), field_(std::move(field)) {}

const char* to_string(FlowErrorKind kind) noexcept {
  switch (kind) {
    case FlowErrorKind::missing_input: return "missing_input";
    case FlowErrorKind::missing_output: return "missing_output";
    case FlowErrorKind::malformed_completion: return "malformed_completion";
    case FlowErrorKind::backend: return "backend";
    case FlowErrorKind::environment: return "environment";
    case FlowErrorKind::replay_divergence: return "replay_divergence";
    case FlowErrorKind::trace_io: return "trace_io";
    case FlowErrorKind::invalid_state: return "invalid_state";
    case FlowErrorKind::failed: return "failed";
  }
  return "failed";
}

FlowError::FlowError(FlowErrorKind kind, InstanceId origin, std::string detail)
    : std::runtime_error(compose(kind, detail, {})), kind_(kind), origin_(std::move(origin)), detail_(std::move(detail)) {}

FlowError FlowError::with_context(std::string where) const {
  FlowError copy = *this;
  copy.context_.insert(copy.context_.begin(), std::move(where));
  static_cast<std::runtime_error&>(copy) = std::runtime_error(compose(kind_, detail_, copy.context_));
  return copy;
}

std::string FlowError::compose(FlowErrorKind kind, const std::string& detail, const std::vector<std::string>& ctx) {
  std::string out;
  for (const auto& c : ctx) out += c + ": ";
  out += std::string(to_string(kind)) + ": " + detail;
  return out;
}

namespace {

std::vector<std::string> parse_key_list(const Value& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(ConfigError::Kind::invalid_params, field, "must be a list of keys");
  std::vector<std::string> keys;
  std::set<std::string> seen;
  for (const auto& item : v) {
    if (!item.is_string() || item.get<std::string>().empty()) {
      throw ConfigError(ConfigError::Kind::invalid_params, field, "keys must be non-empty text");
    }
    auto key = item.get<std::string>();
    if (is_reserved_key(key)) {
      throw ConfigError(ConfigError::Kind::invalid_params, field, "key '" + key + "' uses the reserved '_' prefix");
    }
    if (!seen.insert(key).second) {
      throw ConfigError(ConfigError::Kind::invalid_params, field, "duplicate key '" + key + "'");
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

}  // namespace

Value FlowConfig::to_value() const {
  return Value{{"name", name}, {"kind", kind}, {"input_keys", input_keys}, {"output_keys", output_keys}, {"params", params}};
}

FlowConfig FlowConfig::from_value(const Value& v) {
  if (!v.is_object()) throw ConfigError(ConfigError::Kind::invalid_params, "", "flow config must be a map");
  static const std::set<std::string> known{"name", "kind", "input_keys", "output_keys", "params"};
  for (const auto& [key, _] : v.items()) {
    if (!known.contains(key)) throw ConfigError(ConfigError::Kind::invalid_params, key, "unknown field");
  }
  FlowConfig c;
  if (!v.contains("name") || !v["name"].is_string() || v["name"].get<std::string>().empty()) {
    throw ConfigError(ConfigError::Kind::invalid_params, "name", "must be non-empty text");
  }
  c.name = v["name"].get<std::string>();
  if (!v.contains("kind") || !v["kind"].is_string()) {
    throw ConfigError(ConfigError::Kind::invalid_params, "kind", "must be text");
  }
  c.kind = v["kind"].get<std::string>();
  if (v.contains("input_keys")) c.input_keys = parse_key_list(v["input_keys"], "input_keys");
  if (v.contains("output_keys")) c.output_keys = parse_key_list(v["output_keys"], "output_keys");
  if (v.contains("params")) {
    if (!v["params"].is_object()) throw ConfigError(ConfigError::Kind::invalid_params, "params", "must be a map");
    c.params = v["params"];
  }
  return c;
}

FlowConfig load_flow_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Kind::invalid_params, "", "cannot open flow config '" + path + "'");
  Value v;
  try {
    v = Value::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(ConfigError::Kind::invalid_params, "", "'" + path + "': " + e.what());
  }
  return FlowConfig::from_value(v);
}

const Value* FlowState::find(std::string_view key) const {
  const auto it = store_.find(key);
  return it == store_.end() ? nullptr : &it->second;
}

void FlowState::erase(std::string_view key) {
  const auto it = store_.find(key);
  if (it != store_.end()) store_.erase(it);
}

void RunContext::emit(EventKind kind, const InstanceId& instance, Value body) const {
  if (trace != nullptr) trace->record(kind, instance, std::move(body));
}

Flow::Flow(FlowConfig config) : config_(std::move(config)), state_(next_instance_id()) {}

void Flow::reset_state() {
  state_.clear();
  for (const auto& child : children()) child->reset_state();
}

StateSnapshot Flow::snapshot_state() const {
  StateSnapshot out{{instance_id(), state_.store()}};
  for (const auto& child : children()) out.merge(child->snapshot_state());
  return out;
}

void Flow::put_state(RunContext& ctx, std::string key, Value value) {
  ctx.emit(EventKind::state_update, instance_id(), Value{{"key", key}});
  state_.set(std::move(key), std::move(value));
}

Message Flow::run(const Message& input, RunContext& ctx) {
  if (running_) {
    throw FlowError(FlowErrorKind::invalid_state, instance_id(), "flow '" + config_.name + "' is already running");
  }
  Value start{{"name", config_.name}, {"kind", config_.kind}, {"depth", ctx.depth}};
  if (ctx.depth == 0) start["config"] = config_.to_value();

  running_ = true;
  ++ctx.depth;
  struct Reset {
    bool& flag;
    int& depth;
    ~Reset() {
      flag = false;
      --depth;
    }
  } reset{running_, ctx.depth};
  ctx.emit(EventKind::flow_start, instance_id(), std::move(start));
  ctx.emit(EventKind::message_in, instance_id(), Value{{"message", input.to_value()}});

  auto fail = [&](const FlowError& e) {
    ctx.emit(EventKind::flow_end, instance_id(),
             Value{{"status", "error"}, {"error_kind", to_string(e.kind())}, {"error", e.what()}});
  };

  std::vector<std::string> missing;
  for (const auto& key : config_.input_keys) {
    if (!input.has(key)) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    FlowError e(FlowErrorKind::missing_input, instance_id(), "flow '" + config_.name + "' missing input keys: " + list);
    fail(e);
    throw e;
  }

  StepOutput out{Payload{}};
  try {
    out = step(input, ctx);
  } catch (const FlowError& e) {
    fail(e);
    throw;
  } catch (const std::exception& ex) {
    FlowError e(FlowErrorKind::failed, instance_id(), ex.what());
    fail(e);
    throw e;
  }

  for (const auto& key : config_.output_keys) {
    if (out.payload.find(key) == out.payload.end()) missing.push_back(key);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
    FlowError e(FlowErrorKind::missing_output, instance_id(), "flow '" + config_.name + "' did not produce: " + list);
    fail(e);
    throw e;
  }

  std::vector<MessageId> parents{input.id()};
  for (auto& p : out.extra_parents) parents.push_back(std::move(p));
  Message result(next_message_id(), std::chrono::system_clock::now(), instance_id(), std::move(out.payload),
                 std::move(parents));
  ctx.emit(EventKind::message_out, instance_id(), Value{{"message", result.to_value()}});
  ctx.emit(EventKind::flow_end, instance_id(), Value{{"status", "ok"}});
  return result;
}

}  // namespace flows
