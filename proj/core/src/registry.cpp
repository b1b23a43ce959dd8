#include "flows/registry.hpp"

#include "flows/atomic_flows.hpp"
#include "flows/cc_flows.hpp"
#include "flows/compose.hpp"
#include "flows/llm_flow.hpp"

namespace flows {

void FlowRegistry::add(std::string kind, Factory factory) { factories_.insert_or_assign(std::move(kind), std::move(factory)); }

bool FlowRegistry::contains(std::string_view kind) const { return factories_.find(kind) != factories_.end(); }

std::vector<std::string> FlowRegistry::kinds() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : factories_) out.push_back(k);
  return out;
}

FlowPtr FlowRegistry::create(const FlowConfig& config) const {
  const auto it = factories_.find(config.kind);
  if (it == factories_.end()) {
    throw ConfigError(ConfigError::Kind::unknown_kind, "", "unknown flow kind '" + config.kind + "'");
  }
  for (const auto& key : config.output_keys) {
    if (is_reserved_key(key)) throw ConfigError(ConfigError::Kind::invalid_params, "output_keys", "reserved key '" + key + "'");
  }
  return it->second(config, *this);
}

const FlowRegistry& FlowRegistry::builtin() {
  static const FlowRegistry registry = [] {
    FlowRegistry r;
    r.add("fixed_reply", [](const FlowConfig& c, const FlowRegistry&) { return std::make_unique<FixedReplyFlow>(c); });
    r.add("transform", [](const FlowConfig& c, const FlowRegistry&) { return std::make_unique<TransformFlow>(c); });
    r.add("llm", [](const FlowConfig& c, const FlowRegistry&) { return std::make_unique<LlmFlow>(c); });
    r.add("sandbox_critic",
          [](const FlowConfig& c, const FlowRegistry&) { return std::make_unique<SandboxCriticFlow>(c); });
    r.add("oracle_plan", [](const FlowConfig& c, const FlowRegistry&) { return std::make_unique<OraclePlanFlow>(c); });
    r.add("sequential",
          [](const FlowConfig& c, const FlowRegistry& reg) { return std::make_unique<SequentialFlow>(c, reg); });
    r.add("circular", [](const FlowConfig& c, const FlowRegistry& reg) { return std::make_unique<CircularFlow>(c, reg); });
    r.add("generator_critic",
          [](const FlowConfig& c, const FlowRegistry& reg) { return std::make_unique<GeneratorCriticFlow>(c, reg); });
    return r;
  }();
  return registry;
}

FlowPtr create_flow(const FlowConfig& config) { return FlowRegistry::builtin().create(config); }

const FlowRegistry& RunContext::flow_registry() const { return registry != nullptr ? *registry : FlowRegistry::builtin(); }

}  // namespace flows
