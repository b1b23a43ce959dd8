#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flows/dataset.hpp"
#include "flows/flow.hpp"
#include "flows/sandbox.hpp"

namespace flows {

// ---- code and plan extraction ----------------------------------------------

struct ExtractedCode {
  std::string source;
  std::string fence_label;
};

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contents of the last fenced block labeled `language`; falls back to the
/// last unlabeled block. Throws ExtractionError when neither exists or the
/// chosen block is empty.
ExtractedCode extract_code(std::string_view completion, std::string_view language = "python");

/// Case-sensitive substring test for "Final answer.".
bool detect_final_answer(std::string_view completion) noexcept;

inline constexpr std::string_view kPlanHeader = "# Conceptual solution";

bool has_plan_header(std::string_view completion) noexcept;
/// Text after the last "# Conceptual solution" header, or the whole
/// completion when there is none; trimmed.
std::string extract_plan(std::string_view completion);

// ---- problem rendering -----------------------------------------------------

/// problem_description, input_description, output_description,
/// io_examples_and_explanation. Throws std::invalid_argument when the problem
/// has no public examples.
Payload build_prompt_vars(const Problem& problem);

/// Root input of a variant run: the prompt variables plus "problem_id",
/// "public_tests" (list of {input, output}) and "human_plan" when present.
Payload problem_payload(const Problem& problem);

// ---- variants --------------------------------------------------------------

enum class PlanPart { Plan, Plan_Reflection, Plan_Collaboration, Plan_Oracle };
enum class CodePart { Code, Code_Reflection, Code_Collaboration, Code_Debug, Code_Debug_Collab };

const char* to_string(PlanPart p) noexcept;
const char* to_string(CodePart c) noexcept;

struct FlowVariant {
  std::optional<PlanPart> plan;
  CodePart code = CodePart::Code;

  /// code part alone, or "plan-code".
  std::string display_name() const;

  bool uses_sandbox() const noexcept { return code == CodePart::Code_Debug || code == CodePart::Code_Debug_Collab; }

  friend bool operator==(const FlowVariant&, const FlowVariant&) = default;
};

class VariantError : public std::invalid_argument {
 public:
  VariantError(const std::string& name, std::string suggestion);
  const std::string& suggestion() const noexcept { return suggestion_; }

 private:
  std::string suggestion_;
};

/// Throws VariantError carrying the nearest valid name.
FlowVariant parse_variant(std::string_view name);
/// Every name the grammar admits (5 code parts, 4 x 5 plan-code pairs).
std::vector<FlowVariant> all_variants();
/// The nine evaluated variants.
std::vector<FlowVariant> default_variants();

/// Flow names shared by every variant; call counts are read off trace
/// flow_start events carrying these names.
inline constexpr std::string_view kCodeGeneratorName = "CodeGenerator";
inline constexpr std::string_view kCodeCriticName = "CodeCritic";
inline constexpr std::string_view kPlanGeneratorName = "PlanGenerator";
inline constexpr std::string_view kPlanCriticName = "PlanCritic";

struct VariantSettings {
  int max_rounds = 4;
  sandbox::ExecutionLimits limits{};
  std::string issue_title{sandbox::kDefaultIssueTitle};
  std::string language = "python";
  bool interactive_plan = false;
  std::string code_generator_binding = "code_generator";
  std::string code_critic_binding = "code_critic";
  std::string plan_generator_binding = "plan_generator";
  std::string plan_critic_binding = "plan_critic";
};

/// Composite config for `variant`. Throws std::invalid_argument for
/// max_rounds < 1.
FlowConfig build_variant(const FlowVariant& variant, const VariantSettings& settings = {});

// ---- atomic flows specific to competitive coding ---------------------------

/// Runs the candidate in "code" against "public_tests" and reports
/// "testing_results_summary" and "public_verdict".
///
/// params: code_key, tests_key, language, issue_title, wall_time_ms, memory_bytes
class SandboxCriticFlow final : public Flow {
 public:
  explicit SandboxCriticFlow(FlowConfig config);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  std::string code_key_;
  std::string tests_key_;
  std::string language_;
  std::string issue_title_;
  sandbox::ExecutionLimits limits_;
};

inline constexpr std::string_view kPlanEndMarker = "<EOF>";

/// Emits {"plan": ...}. Dataset mode copies the input's "human_plan";
/// interactive mode prints the problem to the console and reads lines until
/// the end marker (or end of input).
///
/// params: mode ("dataset" | "interactive"), plan_key, end_marker
class OraclePlanFlow final : public Flow {
 public:
  explicit OraclePlanFlow(FlowConfig config);

 protected:
  StepOutput step(const Message& input, RunContext& ctx) override;

 private:
  bool interactive_ = false;
  std::string plan_key_;
  std::string end_marker_;
};

}  // namespace flows
