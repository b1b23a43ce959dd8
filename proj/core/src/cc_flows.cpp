#include "flows/cc_flows.hpp"

#include <algorithm>
#include <iostream>

#include "flows/compose.hpp"

namespace flows {

// ---- extraction --------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

struct Fence {
  std::string label;
  std::string body;
};

/// Fenced blocks opened by a line starting with ``` and closed by a line
/// that is exactly ``` (modulo surrounding blanks). An unclosed block runs to
/// the end of the text.
std::vector<Fence> fenced_blocks(std::string_view text) {
  std::vector<Fence> out;
  std::optional<Fence> open;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const std::string t = trim(line);
    if (!open) {
      if (t.rfind("```", 0) == 0) open = Fence{trim(std::string_view(t).substr(3)), {}};
    } else if (t == "```") {
      out.push_back(std::move(*open));
      open.reset();
    } else {
      if (!open->body.empty() || line.size() > 0 || nl != std::string_view::npos) {
        open->body.append(line);
        open->body.push_back('\n');
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (open) out.push_back(std::move(*open));
  for (auto& f : out) {
    while (!f.body.empty() && (f.body.back() == '\n' || f.body.back() == '\r')) f.body.pop_back();
  }
  return out;
}

}  // namespace

ExtractedCode extract_code(std::string_view completion, std::string_view language) {
  const auto blocks = fenced_blocks(completion);
  const Fence* chosen = nullptr;
  for (const auto& b : blocks) {
    if (b.label == language) chosen = &b;
  }
  if (chosen == nullptr) {
    for (const auto& b : blocks) {
      if (b.label.empty()) chosen = &b;
    }
  }
  if (chosen == nullptr) throw ExtractionError("no fenced code block found");
  if (trim(chosen->body).empty()) throw ExtractionError("fenced code block is empty");
  return {chosen->body, chosen->label};
}

bool detect_final_answer(std::string_view completion) noexcept {
  return completion.find("Final answer.") != std::string_view::npos;
}

bool has_plan_header(std::string_view completion) noexcept { return completion.find(kPlanHeader) != std::string_view::npos; }

std::string extract_plan(std::string_view completion) {
  const auto at = completion.rfind(kPlanHeader);
  if (at == std::string_view::npos) return trim(completion);
  return trim(completion.substr(at + kPlanHeader.size()));
}

// ---- problem rendering ---------------------------------------------------------

namespace {

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

Payload build_prompt_vars(const Problem& problem) {
  if (problem.public_examples.empty()) {
    throw std::invalid_argument("problem '" + problem.id + "' has no public examples");
  }
  std::string io = "# Example test cases";
  for (std::size_t i = 0; i < problem.public_examples.size(); ++i) {
    const auto& ex = problem.public_examples[i];
    io += "\n## Example " + std::to_string(i + 1);
    io += "\n### Input\n```\n" + chomp(ex.input) + "\n```";
    io += "\n### Output\n```\n" + chomp(ex.expected_output.value_or("")) + "\n```";
  }
  if (problem.explanation && !trim(*problem.explanation).empty()) {
    io += "\n\n# Explanation\n" + chomp(*problem.explanation);
  }
  return Payload{{"problem_description", problem.problem_description},
                 {"input_description", problem.input_description},
                 {"output_description", problem.output_description},
                 {"io_examples_and_explanation", io}};
}

Payload problem_payload(const Problem& problem) {
  Payload p = build_prompt_vars(problem);
  p.emplace("problem_id", problem.id);
  Value tests = Value::array();
  for (const auto& t : problem.public_examples) tests.push_back(t.to_value());
  p.emplace("public_tests", std::move(tests));
  if (problem.human_plan) p.emplace("human_plan", *problem.human_plan);
  return p;
}

// ---- variants ------------------------------------------------------------------

const char* to_string(PlanPart p) noexcept {
  switch (p) {
    case PlanPart::Plan: return "Plan";
    case PlanPart::Plan_Reflection: return "Plan_Reflection";
    case PlanPart::Plan_Collaboration: return "Plan_Collaboration";
    case PlanPart::Plan_Oracle: return "Plan_Oracle";
  }
  return "Plan";
}

const char* to_string(CodePart c) noexcept {
  switch (c) {
    case CodePart::Code: return "Code";
    case CodePart::Code_Reflection: return "Code_Reflection";
    case CodePart::Code_Collaboration: return "Code_Collaboration";
    case CodePart::Code_Debug: return "Code_Debug";
    case CodePart::Code_Debug_Collab: return "Code_Debug_Collab";
  }
  return "Code";
}

std::string FlowVariant::display_name() const {
  return plan ? std::string(to_string(*plan)) + "-" + to_string(code) : std::string(to_string(code));
}

namespace {

constexpr PlanPart kPlanParts[] = {PlanPart::Plan, PlanPart::Plan_Reflection, PlanPart::Plan_Collaboration,
                                   PlanPart::Plan_Oracle};
constexpr CodePart kCodeParts[] = {CodePart::Code, CodePart::Code_Reflection, CodePart::Code_Collaboration,
                                   CodePart::Code_Debug, CodePart::Code_Debug_Collab};

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

VariantError::VariantError(const std::string& name, std::string suggestion)
    : std::invalid_argument("unknown variant '" + name + "'" +
                            (suggestion.empty() ? std::string() : "; did you mean '" + suggestion + "'?")),
      suggestion_(std::move(suggestion)) {}

std::vector<FlowVariant> all_variants() {
  std::vector<FlowVariant> out;
  for (auto c : kCodeParts) out.push_back({std::nullopt, c});
  for (auto p : kPlanParts) {
    for (auto c : kCodeParts) out.push_back({p, c});
  }
  return out;
}

std::vector<FlowVariant> default_variants() {
  return {{std::nullopt, CodePart::Code},
          {std::nullopt, CodePart::Code_Reflection},
          {std::nullopt, CodePart::Code_Collaboration},
          {std::nullopt, CodePart::Code_Debug},
          {std::nullopt, CodePart::Code_Debug_Collab},
          {PlanPart::Plan, CodePart::Code},
          {PlanPart::Plan_Reflection, CodePart::Code},
          {PlanPart::Plan_Collaboration, CodePart::Code},
          {PlanPart::Plan_Oracle, CodePart::Code}};
}

FlowVariant parse_variant(std::string_view name) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& v : all_variants()) {
    const auto n = v.display_name();
    if (n == name) return v;
    const auto d = edit_distance(name, n);
    if (d < best_d) {
      best_d = d;
      best = n;
    }
  }
  throw VariantError(std::string(name), best);
}

// ---- prompt templates ------------------------------------------------------------

namespace prompts {

constexpr const char* kCodeSystem =
    "Your goal is to provide executable Python code that solves a competitive programming problem. The code should "
    "correctly handle all corner cases in order to pass the hidden test cases, which are used to evaluate the "
    "correctness of the solution.\n"
    "\n"
    "The user will specify the problem by providing you with:\n"
    "  - the problem statement\n"
    "  - input description\n"
    "  - output description\n"
    "  - example test cases\n"
    "  - (optional) explanation of the test cases\n"
    "\n"
    "The user will provide you with a task and an output format that you will strictly follow.";

constexpr const char* kProblemSection =
    "# Problem statement\n"
    "{{problem_description}}\n"
    "\n"
    "# Input description\n"
    "{{input_description}}\n"
    "\n"
    "# Output description\n"
    "{{output_description}}\n"
    "\n"
    "{{io_examples_and_explanation}}";

constexpr const char* kCodeQueryTail =
    "\n"
    "\n"
    "\n"
    "The input should be read from the standard input and the output should be passed to the standard output.\n"
    "Return Python code that solves the problem. Reply in the following format:\n"
    "```python\n"
    "{{code_placeholder}}\n"
    "```";

constexpr const char* kPlanInjection = "\n\n# Conceptual solution\n{{plan}}";

constexpr const char* kFixedReply =
    "Consider the problem statement and the last proposed solution. Are you sure that the solution is provided in the "
    "requested format, and crucially, solves the problem?\n"
    "If that is not the case, provide the corrected version of the code in the following format:\n"
    "```python\n"
    "{{python_code}}\n"
    "```\n"
    "otherwise, reply:\n"
    "\"Final answer.\"";

constexpr const char* kCodeCollabHuman =
    "# Feedback on the last proposed solution\n"
    "{{code_feedback}}\n"
    "\n"
    "\n"
    "Consider the original problem statement, the last proposed solution and the provided feedback. Does the solution "
    "need to be updated? If so, provide the corrected version of the code in the following format:\n"
    "```python\n"
    "{{code_placeholder}}\n"
    "```\n"
    "otherwise, reply:\n"
    "\"Final answer.\"";

constexpr const char* kCodeCriticSystem =
    "Your goal is to identify potential issues with a competitive programming solution attempt.\n"
    "\n"
    "The user will specify the problem by providing you with:\n"
    "  - the problem statement\n"
    "  - input description\n"
    "  - output description\n"
    "  - example test cases\n"
    "  - (optional) explanation of the test cases\n"
    "  - a Python solution attempt\n"
    "\n"
    "Crucially, your goal is to correctly identify potential issues with the solution attempt, and not to provide the "
    "code implementation yourself.\n"
    "The user will provide you with a task and an output format that you will strictly follow.";

constexpr const char* kCodeCriticQueryTail =
    "\n"
    "\n"
    "# Python solution attempt:\n"
    "```python\n"
    "{{code}}\n"
    "```\n"
    "\n"
    "\n"
    "Consider the problem statement and the solution attempt. Are there any issues with the proposed solution or it is "
    "correct? Explain your reasoning very concisely, and do not provide code.";

constexpr const char* kCodeDebugHuman =
    "{{testing_results_summary}}\n"
    "\n"
    "\n"
    "Consider the problem statement, the last proposed solution, and its issue. Provide a corrected version of the code "
    "that solves the original problem and resolves the issue, without any explanation, in the following format:\n"
    "```python\n"
    "{{code_placeholder}}\n"
    "```";

constexpr const char* kDebugCriticSystem =
    "Your goal is to identify the issues with an incorrect competitive programming solution attempt.\n"
    "\n"
    "The user will specify the problem by providing you with:\n"
    "  - the problem statement\n"
    "  - input description\n"
    "  - output description\n"
    "  - example test cases\n"
    "  - (optional) explanation of the test cases\n"
    "  - an incorrect Python solution attempt and a description of its issue\n"
    "\n"
    "Crucially, your goal is to consider all aspects of the problem and pinpoint the issues with the solution attempt, "
    "and not to provide the code implementation yourself.\n"
    "Some aspects to consider: Is the input correctly parsed? Is the output correctly formatted? Are the corner cases "
    "correctly handled? Is there a logical mistake with the algorithm itself?\n"
    "Use the code execution results provided in the issue description to guide your reasoning/debugging.";

constexpr const char* kDebugCriticQueryTail =
    "\n"
    "\n"
    "# Solution attempt to be fixed\n"
    "```python\n"
    "{{code}}\n"
    "```\n"
    "\n"
    "{{testing_results_summary}}\n"
    "\n"
    "\n"
    "Consider the problem statement, the solution attempt and the issue. Why is the solution attempt incorrect? How "
    "should it be fixed? Explain your reasoning very concisely, and do not provide code.";

constexpr const char* kPlanSystem =
    "Your goal is to provide a high-level conceptual solution that, if implemented, will solve a given competitive "
    "programming problem.\n"
    "\n"
    "The user will specify the problem by providing you with:\n"
    "  - the problem statement\n"
    "  - input description\n"
    "  - output description\n"
    "  - example test cases\n"
    "  - (optional) explanation of the test cases\n"
    "\n"
    "The proposed algorithm should be computationally efficient, logically correct and handle all corner cases.\n"
    "\n"
    "The user will provide you with a task and an output format that you will strictly follow.";

constexpr const char* kPlanQueryTail =
    "\n"
    "\n"
    "\n"
    "Return a high-level conceptual solution that would solve the problem. Be very concise, and do not provide code.\n"
    "Reply in the following format:\n"
    "# Conceptual solution\n"
    "{{plan_placeholder}}";

constexpr const char* kPlanFixedReply =
    "Consider the problem statement and the last proposed conceptual solution. Is it efficient, correct on all corner "
    "cases, and given in the requested format?\n"
    "If not, provide the corrected conceptual solution in the following format:\n"
    "# Conceptual solution\n"
    "{{conceptual_solution}}\n"
    "otherwise, reply:\n"
    "\"Final answer.\"";

constexpr const char* kPlanCollabHuman =
    "# Feedback on the last proposed conceptual solution\n"
    "{{plan_feedback}}\n"
    "\n"
    "\n"
    "Taking the feedback into account, decide whether the conceptual solution must change. If it does, reply with the "
    "revised version in the following format:\n"
    "# Conceptual solution\n"
    "{{plan_placeholder}}\n"
    "otherwise, reply:\n"
    "\"Final answer.\"";

constexpr const char* kPlanCriticSystem =
    "Your goal is to find flaws in a high-level conceptual solution to a competitive programming problem.\n"
    "\n"
    "The user will specify the problem by providing you with:\n"
    "  - the problem statement\n"
    "  - input description\n"
    "  - output description\n"
    "  - example test cases\n"
    "  - (optional) explanation of the test cases\n"
    "  - a conceptual solution attempt\n"
    "\n"
    "Point out incorrect reasoning, missed corner cases and inefficiencies. Do not write code.\n"
    "The user will provide you with a task and an output format that you will strictly follow.";

constexpr const char* kPlanCriticQueryTail =
    "\n"
    "\n"
    "# Conceptual solution attempt:\n"
    "{{plan}}\n"
    "\n"
    "\n"
    "Is the conceptual solution correct and efficient enough? Explain your reasoning very concisely, and do not provide "
    "code.";

}  // namespace prompts

namespace {

const std::vector<std::string> kPromptKeys{"problem_description", "input_description", "output_description",
                                           "io_examples_and_explanation"};

TerminationPredicate final_answer_on(std::string key) {
  return {std::move(key), TerminationPredicate::Mode::contains, "Final answer."};
}

TerminationPredicate all_passed() {
  return {"public_verdict", TerminationPredicate::Mode::equals, sandbox::to_string(sandbox::Verdict::AllPassed)};
}

FlowConfig llm_config(std::string name, const std::string& binding, std::string system, std::string query,
                      std::string human, std::vector<std::string> inputs, std::vector<std::string> outputs) {
  FlowConfig c;
  c.name = std::move(name);
  c.kind = "llm";
  c.input_keys = std::move(inputs);
  c.output_keys = std::move(outputs);
  c.params = Value{{"backend", binding}, {"system_message", std::move(system)}, {"query_message", std::move(query)},
                   {"human_message", std::move(human)}};
  return c;
}

std::vector<std::string> with(std::vector<std::string> keys, std::initializer_list<const char*> more) {
  for (const char* k : more) keys.emplace_back(k);
  return keys;
}

FlowConfig code_generator(const VariantSettings& s, bool with_plan, const char* human,
                          std::initializer_list<const char*> extra_inputs = {}) {
  std::string query = std::string(prompts::kProblemSection) + prompts::kCodeQueryTail;
  if (with_plan) query += prompts::kPlanInjection;
  auto inputs = with(kPromptKeys, extra_inputs);
  if (with_plan) inputs.emplace_back("plan");
  FlowConfig c = llm_config(std::string(kCodeGeneratorName), s.code_generator_binding, prompts::kCodeSystem,
                            std::move(query), human, std::move(inputs), {"api_output", "code"});
  c.params["partial_variables"] = Value{{"code_placeholder", "{{python_code}}"}};
  c.params["extract"] = "code";
  c.params["language"] = s.language;
  return c;
}

FlowConfig sandbox_critic(std::string name, const VariantSettings& s) {
  FlowConfig c;
  c.name = std::move(name);
  c.kind = "sandbox_critic";
  c.input_keys = {"code", "public_tests"};
  c.output_keys = {"testing_results_summary", "public_verdict"};
  c.params = Value{{"language", s.language},
                   {"issue_title", s.issue_title},
                   {"wall_time_ms", s.limits.wall_time.count()},
                   {"memory_bytes", s.limits.memory}};
  return c;
}

FlowConfig code_flow(CodePart part, bool with_plan, const VariantSettings& s) {
  const std::string name = to_string(part);
  switch (part) {
    case CodePart::Code:
      return code_generator(s, with_plan, "{{query}}");
    case CodePart::Code_Reflection: {
      GeneratorCriticSpec g;
      g.generator = code_generator(s, with_plan, "{{query}}");
      g.critic.name = std::string(kCodeCriticName);
      g.critic.kind = "fixed_reply";
      g.critic.output_keys = {"query"};
      g.critic.params = Value{{"reply", prompts::kFixedReply}, {"output_key", "query"}};
      g.max_rounds = s.max_rounds;
      g.stop_on = final_answer_on("api_output");
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"query", "query"}});
      return make_config(name, g);
    }
    case CodePart::Code_Collaboration: {
      GeneratorCriticSpec g;
      g.generator = code_generator(s, with_plan, prompts::kCodeCollabHuman);
      g.critic = llm_config(std::string(kCodeCriticName), s.code_critic_binding, prompts::kCodeCriticSystem,
                            std::string(prompts::kProblemSection) + prompts::kCodeCriticQueryTail, "{{query}}",
                            with(kPromptKeys, {"code"}), {"api_output"});
      g.critic.params["keep_history"] = false;
      g.max_rounds = s.max_rounds;
      g.stop_on = final_answer_on("api_output");
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"api_output", "code_feedback"}});
      return make_config(name, g);
    }
    case CodePart::Code_Debug: {
      GeneratorCriticSpec g;
      g.generator = code_generator(s, with_plan, prompts::kCodeDebugHuman);
      g.critic = sandbox_critic(std::string(kCodeCriticName), s);
      g.max_rounds = s.max_rounds;
      g.critic_stop_on = all_passed();
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"testing_results_summary", "testing_results_summary"}});
      return make_config(name, g);
    }
    case CodePart::Code_Debug_Collab: {
      FlowConfig llm_critic =
          llm_config("CodeDebugCritic", s.code_critic_binding, prompts::kDebugCriticSystem,
                     std::string(prompts::kProblemSection) + prompts::kDebugCriticQueryTail, "{{query}}",
                     with(kPromptKeys, {"code", "testing_results_summary"}), {"api_output"});
      llm_critic.params["keep_history"] = false;
      llm_critic.params["skip_when"] = all_passed().to_value();
      llm_critic.params["skip_output_from"] = "testing_results_summary";
      SequentialSpec critic;
      critic.steps.push_back({sandbox_critic("CodeTesting", s), {}});
      critic.steps.push_back({std::move(llm_critic), KeyMapping(std::vector<KeyMapping::Entry>{{"testing_results_summary", "testing_results_summary"},
                                                                 {"public_verdict", "public_verdict"}})});
      GeneratorCriticSpec g;
      g.generator = code_generator(s, with_plan, prompts::kCodeCollabHuman);
      g.critic = make_config(std::string(kCodeCriticName), critic);
      g.max_rounds = s.max_rounds;
      g.stop_on = final_answer_on("api_output");
      g.critic_stop_on = all_passed();
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"api_output", "code_feedback"}});
      return make_config(name, g);
    }
  }
  throw std::invalid_argument("unknown code part");
}

FlowConfig plan_generator(const VariantSettings& s, const char* human) {
  FlowConfig c = llm_config(std::string(kPlanGeneratorName), s.plan_generator_binding, prompts::kPlanSystem,
                            std::string(prompts::kProblemSection) + prompts::kPlanQueryTail, human, kPromptKeys,
                            {"api_output", "plan"});
  c.params["partial_variables"] = Value{{"plan_placeholder", "{{conceptual_solution}}"}};
  c.params["extract"] = "plan";
  return c;
}

FlowConfig plan_flow(PlanPart part, const VariantSettings& s) {
  const std::string name = to_string(part);
  switch (part) {
    case PlanPart::Plan:
      return plan_generator(s, "{{query}}");
    case PlanPart::Plan_Reflection: {
      GeneratorCriticSpec g;
      g.generator = plan_generator(s, "{{query}}");
      g.critic.name = std::string(kPlanCriticName);
      g.critic.kind = "fixed_reply";
      g.critic.output_keys = {"query"};
      g.critic.params = Value{{"reply", prompts::kPlanFixedReply}, {"output_key", "query"}};
      g.max_rounds = s.max_rounds;
      g.stop_on = final_answer_on("api_output");
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"query", "query"}});
      return make_config(name, g);
    }
    case PlanPart::Plan_Collaboration: {
      GeneratorCriticSpec g;
      g.generator = plan_generator(s, prompts::kPlanCollabHuman);
      g.critic = llm_config(std::string(kPlanCriticName), s.plan_critic_binding, prompts::kPlanCriticSystem,
                            std::string(prompts::kProblemSection) + prompts::kPlanCriticQueryTail, "{{query}}",
                            with(kPromptKeys, {"plan"}), {"api_output"});
      g.critic.params["keep_history"] = false;
      g.max_rounds = s.max_rounds;
      g.stop_on = final_answer_on("api_output");
      g.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"api_output", "plan_feedback"}});
      return make_config(name, g);
    }
    case PlanPart::Plan_Oracle: {
      FlowConfig c;
      c.name = std::string(kPlanGeneratorName);
      c.kind = "oracle_plan";
      c.output_keys = {"plan"};
      c.params = Value{{"mode", s.interactive_plan ? "interactive" : "dataset"}};
      return c;
    }
  }
  throw std::invalid_argument("unknown plan part");
}

}  // namespace

FlowConfig build_variant(const FlowVariant& variant, const VariantSettings& settings) {
  if (settings.max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");
  if (!variant.plan) {
    if (variant.code != CodePart::Code) return code_flow(variant.code, false, settings);
    // The bare generator keeps its role name so call counting stays uniform.
    SequentialSpec wrap;
    wrap.steps.push_back({code_generator(settings, false, "{{query}}"), {}});
    return make_config(variant.display_name(), wrap);
  }
  SequentialSpec seq;
  seq.steps.push_back({plan_flow(*variant.plan, settings), {}});
  seq.steps.push_back({code_flow(variant.code, true, settings), KeyMapping(std::vector<KeyMapping::Entry>{{"plan", "plan"}})});
  return make_config(variant.display_name(), seq);
}

// ---- sandbox critic ---------------------------------------------------------------

namespace {

ConfigError bad_param(const std::string& field, const std::string& msg) {
  return ConfigError(ConfigError::Kind::invalid_params, "params." + field, msg);
}

std::string string_param(const Value& p, const char* key, std::string fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_string()) throw bad_param(key, "must be text");
  return p[key].get<std::string>();
}

}  // namespace

SandboxCriticFlow::SandboxCriticFlow(FlowConfig config) : Flow(std::move(config)) {
  const auto& p = this->config().params;
  code_key_ = string_param(p, "code_key", "code");
  tests_key_ = string_param(p, "tests_key", "public_tests");
  language_ = string_param(p, "language", "python");
  issue_title_ = string_param(p, "issue_title", std::string(sandbox::kDefaultIssueTitle));
  if (p.contains("wall_time_ms")) {
    if (!p["wall_time_ms"].is_number_integer() || p["wall_time_ms"].get<long long>() <= 0) {
      throw bad_param("wall_time_ms", "must be a positive integer");
    }
    limits_.wall_time = std::chrono::milliseconds(p["wall_time_ms"].get<long long>());
  }
  if (p.contains("memory_bytes")) {
    if (!p["memory_bytes"].is_number_integer() || p["memory_bytes"].get<long long>() <= 0) {
      throw bad_param("memory_bytes", "must be a positive integer");
    }
    limits_.memory = p["memory_bytes"].get<std::uint64_t>();
  }
}

StepOutput SandboxCriticFlow::step(const Message& input, RunContext& ctx) {
  if (ctx.toolchain == nullptr) {
    throw FlowError(FlowErrorKind::environment, instance_id(), "no sandbox toolchain configured");
  }
  const auto& code = input.at(code_key_);
  const auto& tests_v = input.at(tests_key_);
  if (!code.is_string() || !tests_v.is_array()) {
    throw FlowError(FlowErrorKind::failed, instance_id(), "'" + code_key_ + "' must be text and '" + tests_key_ +
                                                              "' a list of tests");
  }
  std::vector<sandbox::TestCase> tests;
  for (const auto& t : tests_v) tests.push_back(sandbox::TestCase::from_value(t));
  sandbox::TestReport report;
  try {
    report = sandbox::run_tests({language_, code.get<std::string>()}, tests, limits_, *ctx.toolchain, issue_title_);
  } catch (const sandbox::SandboxEnvironmentError& e) {
    throw FlowError(FlowErrorKind::environment, instance_id(), e.what());
  } catch (const std::invalid_argument& e) {
    throw FlowError(FlowErrorKind::environment, instance_id(), e.what());
  }
  return Payload{{"testing_results_summary", report.summary}, {"public_verdict", sandbox::to_string(report.verdict)}};
}

// ---- oracle plan ---------------------------------------------------------------------

OraclePlanFlow::OraclePlanFlow(FlowConfig config) : Flow(std::move(config)) {
  const auto& p = this->config().params;
  const auto mode = string_param(p, "mode", "dataset");
  if (mode != "dataset" && mode != "interactive") throw bad_param("mode", "must be dataset or interactive");
  interactive_ = mode == "interactive";
  plan_key_ = string_param(p, "plan_key", "human_plan");
  end_marker_ = string_param(p, "end_marker", std::string(kPlanEndMarker));
}

StepOutput OraclePlanFlow::step(const Message& input, RunContext& ctx) {
  if (!interactive_) {
    if (!input.has(plan_key_) || !input.at(plan_key_).is_string()) {
      throw FlowError(FlowErrorKind::missing_input, instance_id(), "problem has no '" + plan_key_ + "'");
    }
    return Payload{{"plan", input.at(plan_key_)}};
  }
  if (ctx.console.in == nullptr) {
    throw FlowError(FlowErrorKind::environment, instance_id(), "interactive plan input needs a console");
  }
  if (ctx.console.out != nullptr) {
    auto& out = *ctx.console.out;
    for (const char* key : {"problem_description", "input_description", "output_description",
                            "io_examples_and_explanation"}) {
      if (input.has(key)) out << text_form(input.at(key)) << "\n\n";
    }
    out << "Enter a plan; finish with a line containing " << end_marker_ << ":\n";
    out.flush();
  }
  std::string plan;
  std::string line;
  bool first = true;
  while (std::getline(*ctx.console.in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == end_marker_) break;
    if (!first) plan += '\n';
    plan += line;
    first = false;
  }
  return Payload{{"plan", plan}};
}

}  // namespace flows
