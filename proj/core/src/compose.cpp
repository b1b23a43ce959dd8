#include "flows/compose.hpp"

#include <set>
#include <stdexcept>

#include "flows/registry.hpp"

namespace flows {

KeyMapping::KeyMapping(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::set<std::string, std::less<>> targets;
  for (const auto& e : entries_) {
    if (e.from.empty() || e.to.empty()) throw std::invalid_argument("mapping keys must be non-empty");
    if (is_reserved_key(e.to)) throw std::invalid_argument("mapping target '" + e.to + "' is reserved");
    if (!targets.insert(e.to).second) throw std::invalid_argument("duplicate mapping target '" + e.to + "'");
  }
}

Payload KeyMapping::apply(const Payload& source) const {
  Payload out;
  for (const auto& e : entries_) {
    const auto it = source.find(e.from);
    if (it == source.end()) throw std::out_of_range("mapping source key '" + e.from + "' is not available");
    out.insert_or_assign(e.to, it->second);
  }
  return out;
}

Value KeyMapping::to_value() const {
  Value out = Value::array();
  for (const auto& e : entries_) out.push_back(Value{{"from", e.from}, {"to", e.to}});
  return out;
}

KeyMapping KeyMapping::from_value(const Value& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(ConfigError::Kind::invalid_params, field, "must be a list of {from, to}");
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& item = v[i];
    if (!item.is_object() || !item.contains("from") || !item.contains("to") || !item["from"].is_string() ||
        !item["to"].is_string()) {
      throw ConfigError(ConfigError::Kind::invalid_params, field + "[" + std::to_string(i) + "]",
                        "expected {\"from\": text, \"to\": text}");
    }
    entries.push_back({item["from"].get<std::string>(), item["to"].get<std::string>()});
  }
  try {
    return KeyMapping(std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(ConfigError::Kind::invalid_params, field, e.what());
  }
}

bool TerminationPredicate::holds(const Payload& payload) const {
  const auto it = payload.find(key);
  if (it == payload.end()) return false;
  std::string text;
  try {
    text = text_form(it->second);
  } catch (const std::invalid_argument&) {
    return false;
  }
  return mode == Mode::equals ? text == needle : text.find(needle) != std::string::npos;
}

Value TerminationPredicate::to_value() const {
  return Value{{"key", key}, {"mode", mode == Mode::equals ? "equals" : "contains"}, {"needle", needle}};
}

TerminationPredicate TerminationPredicate::from_value(const Value& v, const std::string& field) {
  auto bad = [&](const std::string& sub, const std::string& msg) {
    return ConfigError(ConfigError::Kind::invalid_params, field + sub, msg);
  };
  if (!v.is_object()) throw bad("", "must be a map {key, mode, needle}");
  TerminationPredicate p;
  if (!v.contains("key") || !v["key"].is_string() || v["key"].get<std::string>().empty()) {
    throw bad(".key", "must be non-empty text");
  }
  p.key = v["key"].get<std::string>();
  const std::string mode = v.value("mode", "contains");
  if (mode == "contains") {
    p.mode = Mode::contains;
  } else if (mode == "equals") {
    p.mode = Mode::equals;
  } else {
    throw bad(".mode", "must be 'contains' or 'equals'");
  }
  if (!v.contains("needle") || !v["needle"].is_string() || v["needle"].get<std::string>().empty()) {
    throw bad(".needle", "must be non-empty text");
  }
  p.needle = v["needle"].get<std::string>();
  return p;
}

namespace {

ConfigError invalid(const std::string& field, const std::string& msg) {
  return ConfigError(ConfigError::Kind::invalid_params, field, msg);
}

int parse_rounds(const Value& params) {
  if (!params.contains("max_rounds")) return 1;
  const auto& v = params["max_rounds"];
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw invalid("params.max_rounds", "must be an integer >= 1");
  return v.get<int>();
}

std::vector<CompositeStep> parse_steps(const Value& params) {
  if (!params.contains("children") || !params["children"].is_array() || params["children"].empty()) {
    throw invalid("params.children", "must be a non-empty list of flow configs");
  }
  const auto& children = params["children"];
  const Value mappings = params.value("mappings", Value::array());
  if (!mappings.is_array() || (!mappings.empty() && mappings.size() != children.size())) {
    throw invalid("params.mappings", "must list one mapping per child");
  }
  std::vector<CompositeStep> steps;
  for (std::size_t i = 0; i < children.size(); ++i) {
    const std::string field = "params.children[" + std::to_string(i) + "]";
    CompositeStep s;
    try {
      s.flow = FlowConfig::from_value(children[i]);
    } catch (const ConfigError& e) {
      throw invalid(field + (e.field().empty() ? "" : "." + e.field()), e.what());
    }
    if (!mappings.empty()) {
      s.input_mapping = KeyMapping::from_value(mappings[i], "params.mappings[" + std::to_string(i) + "]");
    }
    steps.push_back(std::move(s));
  }
  return steps;
}

void steps_to_params(const std::vector<CompositeStep>& steps, Value& params) {
  params["children"] = Value::array();
  params["mappings"] = Value::array();
  for (const auto& s : steps) {
    params["children"].push_back(s.flow.to_value());
    params["mappings"].push_back(s.input_mapping.to_value());
  }
}

std::optional<TerminationPredicate> parse_predicate(const Value& params, const std::string& name) {
  if (!params.contains(name)) return std::nullopt;
  return TerminationPredicate::from_value(params[name], "params." + name);
}

FlowConfig composite_config(std::string name, std::string kind, Value params) {
  FlowConfig c;
  c.name = std::move(name);
  c.kind = std::move(kind);
  c.params = std::move(params);
  return c;
}

}  // namespace

FlowConfig make_config(std::string name, const SequentialSpec& spec) {
  Value params = Value::object();
  steps_to_params(spec.steps, params);
  return composite_config(std::move(name), "sequential", std::move(params));
}

FlowConfig make_config(std::string name, const CircularSpec& spec) {
  Value params = Value::object();
  steps_to_params(spec.steps, params);
  params["max_rounds"] = spec.max_rounds;
  if (spec.exit) params["exit"] = spec.exit->to_value();
  return composite_config(std::move(name), "circular", std::move(params));
}

FlowConfig make_config(std::string name, const GeneratorCriticSpec& spec) {
  Value params{{"children", Value::array({spec.generator.to_value(), spec.critic.to_value()})},
               {"max_rounds", spec.max_rounds},
               {"feedback_mapping", spec.feedback_mapping.to_value()}};
  if (spec.stop_on) params["stop_on"] = spec.stop_on->to_value();
  if (spec.critic_stop_on) params["critic_stop_on"] = spec.critic_stop_on->to_value();
  return composite_config(std::move(name), "generator_critic", std::move(params));
}

SequentialSpec parse_sequential(const FlowConfig& config) { return SequentialSpec{parse_steps(config.params)}; }

CircularSpec parse_circular(const FlowConfig& config) {
  CircularSpec spec;
  spec.steps = parse_steps(config.params);
  spec.max_rounds = parse_rounds(config.params);
  spec.exit = parse_predicate(config.params, "exit");
  return spec;
}

GeneratorCriticSpec parse_generator_critic(const FlowConfig& config) {
  const auto& params = config.params;
  if (!params.contains("children") || !params["children"].is_array() || params["children"].size() != 2) {
    throw invalid("params.children", "must list exactly [generator, critic]");
  }
  GeneratorCriticSpec spec;
  try {
    spec.generator = FlowConfig::from_value(params["children"][0]);
  } catch (const ConfigError& e) {
    throw invalid("params.children[0]" + (e.field().empty() ? "" : "." + e.field()), e.what());
  }
  try {
    spec.critic = FlowConfig::from_value(params["children"][1]);
  } catch (const ConfigError& e) {
    throw invalid("params.children[1]" + (e.field().empty() ? "" : "." + e.field()), e.what());
  }
  spec.max_rounds = parse_rounds(params);
  spec.stop_on = parse_predicate(params, "stop_on");
  spec.critic_stop_on = parse_predicate(params, "critic_stop_on");
  if (params.contains("feedback_mapping")) {
    spec.feedback_mapping = KeyMapping::from_value(params["feedback_mapping"], "params.feedback_mapping");
  }
  return spec;
}

Flow& CompositeFlow::add_child(FlowPtr child) {
  children_.push_back(std::move(child));
  return *children_.back();
}

int rounds_used(const Payload& payload) {
  const auto it = payload.find(kRoundsUsedKey);
  if (it == payload.end() || !it->second.is_number_integer()) return 1;
  return it->second.get<int>();
}

namespace {

struct RoundResult {
  Payload written;
  std::optional<Message> last;
};

/// Runs the step list once. `pool` is the lookup namespace for mapping
/// sources (composite input overlaid with every earlier step output).
RoundResult run_steps(std::span<const std::unique_ptr<Flow>> children, const std::vector<CompositeStep>& steps,
                      const Message& input, const InstanceId& self, Payload& pool, RunContext& ctx,
                      const std::string& where_prefix) {
  RoundResult r;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Flow& child = *children[i];
    const std::string where = where_prefix + "step " + std::to_string(i + 1) + " '" + child.config().name + "'";
    Payload mapped;
    try {
      mapped = steps[i].input_mapping.apply(pool);
    } catch (const std::out_of_range& e) {
      throw FlowError(FlowErrorKind::failed, self, where + ": " + e.what());
    }
    overlay(r.written, mapped);
    Payload child_payload = input.payload();
    overlay(child_payload, r.written);
    std::vector<MessageId> parents{input.id()};
    if (r.last) parents.push_back(r.last->id());
    const Message child_in = package_input(std::move(child_payload), self, std::move(parents));
    try {
      r.last = child.run(child_in, ctx);
    } catch (const FlowError& e) {
      throw e.with_context(where);
    }
    overlay(pool, strip_reserved(r.last->payload()));
  }
  return r;
}

Payload round_output(const RoundResult& r) {
  Payload out = r.written;
  overlay(out, r.last->payload());
  return out;
}

}  // namespace

SequentialFlow::SequentialFlow(const FlowConfig& config, const FlowRegistry& registry)
    : CompositeFlow(config), spec_(parse_sequential(config)) {
  for (const auto& s : spec_.steps) add_child(registry.create(s.flow));
}

StepOutput SequentialFlow::step(const Message& input, RunContext& ctx) {
  Payload pool = input.payload();
  RoundResult r = run_steps(children(), spec_.steps, input, instance_id(), pool, ctx, "");
  return StepOutput(round_output(r), {r.last->id()});
}

CircularFlow::CircularFlow(const FlowConfig& config, const FlowRegistry& registry)
    : CompositeFlow(config), spec_(parse_circular(config)) {
  for (const auto& s : spec_.steps) add_child(registry.create(s.flow));
}

StepOutput CircularFlow::step(const Message& input, RunContext& ctx) {
  Payload pool = input.payload();
  Payload out;
  MessageId last_id;
  int round = 1;
  for (;; ++round) {
    RoundResult r =
        run_steps(children(), spec_.steps, input, instance_id(), pool, ctx, "round " + std::to_string(round) + " ");
    out = round_output(r);
    last_id = r.last->id();
    if (spec_.exit && spec_.exit->holds(out)) break;
    if (round == spec_.max_rounds) break;
  }
  out.insert_or_assign(std::string(kRoundsUsedKey), round);
  return StepOutput(std::move(out), {last_id});
}

GeneratorCriticFlow::GeneratorCriticFlow(const FlowConfig& config, const FlowRegistry& registry)
    : CompositeFlow(config), spec_(parse_generator_critic(config)) {
  add_child(registry.create(spec_.generator));
  add_child(registry.create(spec_.critic));
}

StepOutput GeneratorCriticFlow::step(const Message& input, RunContext& ctx) {
  Payload generator_payload = input.payload();
  std::vector<MessageId> parents{input.id()};
  std::optional<Message> last;
  int round = 1;
  for (;; ++round) {
    const std::string tag = "round " + std::to_string(round);
    const Message gen_in = package_input(generator_payload, instance_id(), parents);
    try {
      last = generator().run(gen_in, ctx);
    } catch (const FlowError& e) {
      throw e.with_context(tag + " generator");
    }
    if (spec_.stop_on && spec_.stop_on->holds(last->payload())) break;
    if (round == spec_.max_rounds) break;

    Payload critic_payload = input.payload();
    overlay(critic_payload, strip_reserved(last->payload()));
    const Message critic_in = package_input(std::move(critic_payload), instance_id(), {input.id(), last->id()});
    std::optional<Message> feedback;
    try {
      feedback = critic().run(critic_in, ctx);
    } catch (const FlowError& e) {
      throw e.with_context(tag + " critic");
    }
    if (spec_.critic_stop_on && spec_.critic_stop_on->holds(feedback->payload())) break;

    generator_payload = input.payload();
    try {
      overlay(generator_payload, spec_.feedback_mapping.apply(feedback->payload()));
    } catch (const std::out_of_range& e) {
      throw FlowError(FlowErrorKind::failed, instance_id(), tag + " feedback: " + e.what());
    }
    parents = {input.id(), feedback->id()};
  }
  Payload out = last->payload();
  out.insert_or_assign(std::string(kRoundsUsedKey), round);
  return StepOutput(std::move(out), {last->id()});
}

}  // namespace flows
