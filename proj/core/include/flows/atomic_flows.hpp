#pragma once

#include "flows/compose.hpp"
#include "flows/flow.hpp"

namespace flows {

/// Replies with a configured text regardless of input.
/// params: reply (text, required), output_key (default "reply").
class FixedReplyFlow final : public Flow {
 public:
  explicit FixedReplyFlow(FlowConfig config);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  std::string reply_;
  std::string output_key_;
};

/// Copies and renames payload entries and sets constants.
/// params: mapping (KeyMapping), set (map of constants).
class TransformFlow final : public Flow {
 public:
  explicit TransformFlow(FlowConfig config);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  KeyMapping mapping_;
  Payload constants_;
};

}  // namespace flows
