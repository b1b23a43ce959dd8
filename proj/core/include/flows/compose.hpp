#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flows/flow.hpp"

namespace flows {

/// Wires values between flows: each entry copies `from` into `to`.
/// Target keys are unique and never reserved.
class KeyMapping {
 public:
  struct Entry {
    std::string from;
    std::string to;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  KeyMapping() = default;
  /// Throws std::invalid_argument on duplicate/reserved/empty targets.
  explicit KeyMapping(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Values for every target, looked up by source key in `source`.
  /// Throws std::out_of_range naming the first absent source key.
  Payload apply(const Payload& source) const;

  Value to_value() const;
  /// Accepts [{"from": "a", "to": "b"}, ...]. Throws ConfigError for `field`.
  static KeyMapping from_value(const Value& v, const std::string& field);

  friend bool operator==(const KeyMapping&, const KeyMapping&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Checks a payload entry: mode "contains" (substring) or "equals".
struct TerminationPredicate {
  enum class Mode { contains, equals };

  std::string key;
  Mode mode = Mode::contains;
  std::string needle;

  /// False when the key is absent or its value has no text form.
  bool holds(const Payload& payload) const;

  Value to_value() const;
  static TerminationPredicate from_value(const Value& v, const std::string& field);

  friend bool operator==(const TerminationPredicate&, const TerminationPredicate&) = default;
};

struct CompositeStep {
  FlowConfig flow;
  KeyMapping input_mapping;
};

struct SequentialSpec {
  std::vector<CompositeStep> steps;
};

struct CircularSpec {
  std::vector<CompositeStep> steps;
  int max_rounds = 1;
  std::optional<TerminationPredicate> exit;
};

struct GeneratorCriticSpec {
  FlowConfig generator;
  FlowConfig critic;
  int max_rounds = 1;
  /// Checked on every generator output; ends the loop before the critic runs.
  std::optional<TerminationPredicate> stop_on;
  /// Checked on every critic output; ends the loop without another
  /// generator call (used when the critic judges the solution final, e.g.
  /// all public tests pass).
  std::optional<TerminationPredicate> critic_stop_on;
  KeyMapping feedback_mapping;
};

FlowConfig make_config(std::string name, const SequentialSpec& spec);
FlowConfig make_config(std::string name, const CircularSpec& spec);
FlowConfig make_config(std::string name, const GeneratorCriticSpec& spec);

SequentialSpec parse_sequential(const FlowConfig& config);
CircularSpec parse_circular(const FlowConfig& config);
GeneratorCriticSpec parse_generator_critic(const FlowConfig& config);

/// Base for flows that own child instances (tree-shaped ownership).
class CompositeFlow : public Flow {
 public:
  using Flow::Flow;

  std::span<const std::unique_ptr<Flow>> children() const noexcept override { return children_; }

 protected:
  Flow& add_child(FlowPtr child);
  Flow& child(std::size_t i) const { return *children_.at(i); }

 private:
  std::vector<FlowPtr> children_;
};

/// Runs each step once, in order. Step i sees the composite input overlaid
/// with every value written by the mappings of steps 1..i. The output is the
/// accumulated mapped values overlaid with the last step's output.
class SequentialFlow final : public CompositeFlow {
 public:
  SequentialFlow(const FlowConfig& config, const FlowRegistry& registry);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  SequentialSpec spec_;
};

/// Repeats the step list until `exit` holds on a round's output or
/// max_rounds is reached. Output carries "_rounds_used".
class CircularFlow final : public CompositeFlow {
 public:
  CircularFlow(const FlowConfig& config, const FlowRegistry& registry);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  CircularSpec spec_;
};

/// generator -> stop_on? -> critic -> critic_stop_on? -> feedback -> generator ...
/// At most max_rounds generator calls; the critic never runs after the final
/// generator call. Returns the last generator output plus "_rounds_used".
class GeneratorCriticFlow final : public CompositeFlow {
 public:
  GeneratorCriticFlow(const FlowConfig& config, const FlowRegistry& registry);

  Flow& generator() const { return child(0); }
  Flow& critic() const { return child(1); }

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  GeneratorCriticSpec spec_;
};

/// Reads "_rounds_used" from a composite output; 1 when absent.
int rounds_used(const Payload& payload);

}  // namespace flows
