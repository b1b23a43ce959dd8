#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "flows/flow.hpp"

namespace flows {

/// Maps flow-kind identifiers to factories. Factories receive the registry so
/// composite kinds can instantiate their children.
class FlowRegistry {
 public:
  using Factory = std::function<FlowPtr(const FlowConfig&, const FlowRegistry&)>;

  void add(std::string kind, Factory factory);
  bool contains(std::string_view kind) const;
  std::vector<std::string> kinds() const;

  /// Throws ConfigError(unknown_kind) or ConfigError(invalid_params).
  FlowPtr create(const FlowConfig& config) const;

  /// fixed_reply, transform, llm, sandbox_critic, oracle_plan, sequential,
  /// circular, generator_critic.
  static const FlowRegistry& builtin();

 private:
  std::map<std::string, Factory, std::less<>> factories_;
};

/// create_flow against the built-in registry.
FlowPtr create_flow(const FlowConfig& config);

}  // namespace flows
