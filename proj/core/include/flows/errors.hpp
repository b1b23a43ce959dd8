#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "flows/ids.hpp"

namespace flows {

/// Raised by create_flow / config parsing. `field` is the dotted path of the
/// offending field ("params.max_rounds"), empty for unknown kinds.
class ConfigError : public std::runtime_error {
 public:
  enum class Kind { unknown_kind, invalid_params };

  ConfigError(Kind kind, std::string field, const std::string& message);

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

enum class FlowErrorKind {
  missing_input,
  missing_output,
  malformed_completion,
  backend,
  environment,
  replay_divergence,
  trace_io,
  invalid_state,
  failed,
};

const char* to_string(FlowErrorKind kind) noexcept;

/// Structured failure raised while running a flow. `origin` is the instance
/// that failed; composites add context ("step 2", "round 3 critic") on the
/// way up without changing the origin.
class FlowError : public std::runtime_error {
 public:
  FlowError(FlowErrorKind kind, InstanceId origin, std::string detail);

  FlowErrorKind kind() const noexcept { return kind_; }
  const InstanceId& origin() const noexcept { return origin_; }
  const std::string& detail() const noexcept { return detail_; }
  /// Outermost context first.
  const std::vector<std::string>& context() const noexcept { return context_; }

  FlowError with_context(std::string where) const;

 private:
  static std::string compose(FlowErrorKind kind, const std::string& detail, const std::vector<std::string>& ctx);

  FlowErrorKind kind_;
  InstanceId origin_;
  std::string detail_;
  std::vector<std::string> context_;
};

}  // namespace flows
