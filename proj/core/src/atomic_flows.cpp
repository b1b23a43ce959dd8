#include "flows/atomic_flows.hpp"

namespace flows {

FixedReplyFlow::FixedReplyFlow(FlowConfig config) : Flow(std::move(config)) {
  const auto& p = this->config().params;
  if (!p.contains("reply") || !p["reply"].is_string()) {
    throw ConfigError(ConfigError::Kind::invalid_params, "params.reply", "must be text");
  }
  reply_ = p["reply"].get<std::string>();
  output_key_ = p.value("output_key", "reply");
  if (output_key_.empty() || is_reserved_key(output_key_)) {
    throw ConfigError(ConfigError::Kind::invalid_params, "params.output_key", "must be a non-reserved key");
  }
}

StepOutput FixedReplyFlow::step(const Message&, RunContext&) { return Payload{{output_key_, reply_}}; }

TransformFlow::TransformFlow(FlowConfig config) : Flow(std::move(config)) {
  const auto& p = this->config().params;
  if (p.contains("mapping")) mapping_ = KeyMapping::from_value(p["mapping"], "params.mapping");
  if (p.contains("set")) {
    if (!p["set"].is_object()) throw ConfigError(ConfigError::Kind::invalid_params, "params.set", "must be a map");
    try {
      constants_ = payload_from(p["set"]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigError::Kind::invalid_params, "params.set", e.what());
    }
    for (const auto& [key, _] : constants_) {
      if (is_reserved_key(key)) {
        throw ConfigError(ConfigError::Kind::invalid_params, "params.set", "key '" + key + "' is reserved");
      }
    }
  }
}

StepOutput TransformFlow::step(const Message& input, RunContext&) {
  Payload out = mapping_.apply(input.payload());
  overlay(out, constants_);
  return out;
}

}  // namespace flows
