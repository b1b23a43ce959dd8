#include "flows/llm_flow.hpp"

#include "flows/cc_flows.hpp"
#include "flows/template.hpp"

namespace flows {
namespace {

ConfigError invalid(const std::string& field, const std::string& msg) {
  return ConfigError(ConfigError::Kind::invalid_params, "params." + field, msg);
}

std::string text_param(const Value& p, const std::string& name, std::string fallback, bool required = false) {
  if (!p.contains(name)) {
    if (required) throw invalid(name, "is required");
    return fallback;
  }
  if (!p[name].is_string()) throw invalid(name, "must be text");
  return p[name].get<std::string>();
}

Value history_to_value(const std::vector<ChatTurn>& turns) {
  Value out = Value::array();
  for (const auto& t : turns) out.push_back(Value{{"role", to_string(t.role)}, {"content", t.content}});
  return out;
}

std::vector<ChatTurn> history_from_value(const Value* v) {
  std::vector<ChatTurn> out;
  if (v == nullptr) return out;
  for (const auto& t : *v) out.push_back({role_from_string(t.at("role").get<std::string>()), t.at("content").get<std::string>()});
  return out;
}

}  // namespace

LlmFlow::LlmFlow(FlowConfig config) : Flow(std::move(config)) {
  const auto& p = this->config().params;
  binding_ = text_param(p, "backend", "default");
  model_ = text_param(p, "model", "");
  if (p.contains("temperature")) {
    if (!p["temperature"].is_number() || p["temperature"].get<double>() < 0.0) {
      throw invalid("temperature", "must be a non-negative number");
    }
    temperature_ = p["temperature"].get<double>();
  }
  if (p.contains("max_tokens")) {
    if (!p["max_tokens"].is_number_integer() || p["max_tokens"].get<int>() <= 0) {
      throw invalid("max_tokens", "must be a positive integer");
    }
    max_tokens_ = p["max_tokens"].get<int>();
  }
  system_message_ = text_param(p, "system_message", "");
  query_message_ = text_param(p, "query_message", "", true);
  human_message_ = text_param(p, "human_message", query_message_);
  if (p.contains("partial_variables")) {
    try {
      partials_ = payload_from(p["partial_variables"]);
    } catch (const std::invalid_argument& e) {
      throw invalid("partial_variables", e.what());
    }
  }
  if (p.contains("keep_history")) {
    if (!p["keep_history"].is_boolean()) throw invalid("keep_history", "must be a boolean");
    keep_history_ = p["keep_history"].get<bool>();
  }
  output_key_ = text_param(p, "output_key", "api_output");
  if (output_key_.empty() || is_reserved_key(output_key_)) throw invalid("output_key", "must be a non-reserved key");
  extract_ = text_param(p, "extract", "none");
  if (extract_ != "none" && extract_ != "code" && extract_ != "plan") {
    throw invalid("extract", "must be one of none, code, plan");
  }
  language_ = text_param(p, "language", "python");
  if (p.contains("skip_when")) {
    skip_when_ = TerminationPredicate::from_value(p["skip_when"], "params.skip_when");
    skip_output_from_ = text_param(p, "skip_output_from", "", true);
  }
}

StepOutput LlmFlow::step(const Message& input, RunContext& ctx) {
  if (skip_when_ && skip_when_->holds(input.payload())) {
    const auto it = input.payload().find(skip_output_from_);
    return Payload{{output_key_, it == input.payload().end() ? std::string() : text_form(it->second)}};
  }

  Payload vars = input.payload();
  overlay(vars, partials_);

  std::vector<ChatTurn> turns = keep_history_ ? history_from_value(state().find("history")) : std::vector<ChatTurn>{};
  if (turns.empty()) {
    if (!system_message_.empty()) turns.push_back({ChatTurn::Role::system, render_template(system_message_, vars)});
    turns.push_back({ChatTurn::Role::user, render_template(query_message_, vars)});
  } else {
    turns.push_back({ChatTurn::Role::user, render_template(human_message_, vars)});
  }

  BackendRequest request;
  request.turns = turns;
  request.temperature = temperature_;
  request.max_tokens = max_tokens_;

  std::string completion;
  try {
    if (ctx.backends == nullptr) throw BackendError(BackendError::Kind::invalid_request, "no backends configured");
    request.model = model_.empty() ? ctx.backends->resolve(binding_).default_model() : model_;
    completion = ctx.complete(binding_, request, instance_id());
  } catch (const BackendError& e) {
    throw FlowError(e.kind() == BackendError::Kind::not_found ? FlowErrorKind::replay_divergence : FlowErrorKind::backend,
                    instance_id(), std::string(to_string(e.kind())) + ": " + e.what());
  }

  if (keep_history_) {
    turns.push_back({ChatTurn::Role::assistant, completion});
    put_state(ctx, "history", history_to_value(turns));
  }

  Payload out{{output_key_, completion}};
  if (extract_ == "code") {
    std::string code;
    try {
      code = extract_code(completion, language_).source;
    } catch (const ExtractionError&) {
      const Value* previous = state().find("last_code");
      if (!detect_final_answer(completion) || previous == nullptr) {
        throw FlowError(FlowErrorKind::malformed_completion, instance_id(), "completion contains no fenced code block");
      }
      code = previous->get<std::string>();
    }
    put_state(ctx, "last_code", code);
    out.emplace("code", std::move(code));
  } else if (extract_ == "plan") {
    const Value* previous = state().find("last_plan");
    std::string plan = extract_plan(completion);
    if (detect_final_answer(completion) && previous != nullptr && !has_plan_header(completion)) {
      plan = previous->get<std::string>();
    }
    put_state(ctx, "last_plan", plan);
    out.emplace("plan", std::move(plan));
  }
  return out;
}

}  // namespace flows
