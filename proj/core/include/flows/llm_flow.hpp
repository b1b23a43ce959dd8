#pragma once

#include <optional>
#include <string>

#include "flows/backend.hpp"
#include "flows/compose.hpp"
#include "flows/flow.hpp"

namespace flows {

/// Atomic flow around a chat-completion backend.
///
/// params:
///   backend          binding name resolved through RunContext (default "default")
///   model            optional; the backend's default model otherwise
///   temperature      default 0.0
///   max_tokens       default 2048
///   system_message   template for the system turn
///   query_message    template for the first user turn (required)
///   human_message    template for follow-up user turns (defaults to query_message)
///   partial_variables  constant template variables, e.g. {"code_placeholder": "{{python_code}}"}
///   keep_history     default true; false starts every call from a fresh dialogue
///   output_key       default "api_output"
///   extract          "none" | "code" | "plan"
///   language         fence label for code extraction (default "python")
///   skip_when        predicate on the input; when it holds the backend is not
///                    called and output_key is copied from skip_output_from
///
/// The dialogue (system, query, then alternating assistant/user turns) lives
/// in the flow's state so refinement rounds send the whole conversation.
class LlmFlow final : public Flow {
 public:
  explicit LlmFlow(FlowConfig config);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  std::string binding_;
  std::string model_;
  double temperature_ = 0.0;
  int max_tokens_ = 2048;
  std::string system_message_;
  std::string query_message_;
  std::string human_message_;
  Payload partials_;
  bool keep_history_ = true;
  std::string output_key_;
  std::string extract_;
  std::string language_;
  std::optional<TerminationPredicate> skip_when_;
  std::string skip_output_from_;
};

}  // namespace flows
