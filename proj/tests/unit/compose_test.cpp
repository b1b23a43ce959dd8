#include <gtest/gtest.h>

#include <set>

#include <flows/compose.hpp>

#include "test_support.hpp"

namespace flows {
namespace {

using testing::echo_llm;
using testing::fixed_reply;
using testing::run_traced;
using testing::starts_of;

FlowConfig llm_to(std::string name, std::string key, std::string binding) {
  FlowConfig c = echo_llm(std::move(name), std::move(binding));
  c.output_keys = {key};
  c.params["output_key"] = key;
  return c;
}

TEST(KeyMapping, RejectsDuplicateAndReservedTargets) {
  using E = KeyMapping::Entry;
  EXPECT_THROW(KeyMapping(std::vector<E>{{"a", "x"}, {"b", "x"}}), std::invalid_argument);
  EXPECT_THROW(KeyMapping(std::vector<E>{{"a", "_x"}}), std::invalid_argument);
  KeyMapping m(std::vector<E>{{"a", "b"}, {"a", "c"}});
  EXPECT_EQ(m.apply({{"a", 1}}), (Payload{{"b", 1}, {"c", 1}}));
  EXPECT_THROW(m.apply({}), std::out_of_range);
}

TEST(TerminationPredicate, ContainsAndEquals) {
  TerminationPredicate p{"answer", TerminationPredicate::Mode::contains, "Final answer."};
  EXPECT_TRUE(p.holds({{"answer", "ok. Final answer."}}));
  EXPECT_FALSE(p.holds({{"answer", "final answer"}}));
  EXPECT_FALSE(p.holds({}));
  TerminationPredicate q{"done", TerminationPredicate::Mode::equals, "yes"};
  EXPECT_TRUE(q.holds({{"done", "yes"}}));
  EXPECT_FALSE(q.holds({{"done", "yes!"}}));
  EXPECT_THROW(TerminationPredicate::from_value(Value{{"key", "a"}, {"mode", "contains"}, {"needle", ""}}, "f"),
               ConfigError);
}

TEST(Sequential, MappedReplyPassesToLaterSteps) {
  SequentialSpec spec;
  spec.steps.push_back({fixed_reply("s1", "first"), {}});
  spec.steps.push_back({fixed_reply("s2", "second"), KeyMapping(std::vector<KeyMapping::Entry>{{"reply", "note"}})});
  auto f = create_flow(make_config("seq", spec));
  const auto out = run_traced(*f, {{"problem", "p"}}).output.payload();
  EXPECT_EQ(out.at("note"), "first");
  EXPECT_EQ(out.at("reply"), "second");
}

TEST(Sequential, SingleStepEqualsChild) {
  SequentialSpec spec;
  spec.steps.push_back({fixed_reply("only", "x"), {}});
  auto seq = create_flow(make_config("seq", spec));
  auto bare = create_flow(fixed_reply("only", "x"));
  EXPECT_EQ(run_traced(*seq, {{"a", 1}}).output.payload(), run_traced(*bare, {{"a", 1}}).output.payload());
}

TEST(Sequential, OverlayPassesUnmappedKeysToEveryChild) {
  SequentialSpec spec;
  FlowConfig c1 = fixed_reply("s1", "r");
  c1.input_keys = {"problem"};
  FlowConfig c2 = fixed_reply("s2", "r");
  c2.input_keys = {"problem", "note"};
  spec.steps.push_back({c1, {}});
  spec.steps.push_back({c2, KeyMapping(std::vector<KeyMapping::Entry>{{"reply", "note"}})});
  auto f = create_flow(make_config("seq", spec));
  EXPECT_NO_THROW(run_traced(*f, {{"problem", "p"}}));
}

/// id -> parents for every message seen in a trace.
std::map<std::string, std::vector<std::string>> lineage(const std::vector<TraceEvent>& events) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& e : events) {
    if (e.kind != EventKind::message_in && e.kind != EventKind::message_out) continue;
    const auto& m = e.body.at("message");
    out[m.at("id").get<std::string>()] = m.at("parents").get<std::vector<std::string>>();
  }
  return out;
}

bool reaches(const std::map<std::string, std::vector<std::string>>& g, const std::string& from, const std::string& to) {
  std::vector<std::string> todo{from};
  std::set<std::string> seen;
  while (!todo.empty()) {
    const auto cur = todo.back();
    todo.pop_back();
    if (cur == to) return true;
    if (!seen.insert(cur).second) continue;
    const auto it = g.find(cur);
    if (it != g.end()) todo.insert(todo.end(), it->second.begin(), it->second.end());
  }
  return false;
}

TEST(Sequential, CodeLineageIncludesPlanMessage) {
  SequentialSpec spec;
  spec.steps.push_back({llm_to("PlanGenerator", "plan", "plan"), {}});
  FlowConfig code = llm_to("CodeGenerator", "api_output", "code");
  code.params["query_message"] = "{{problem}}\n\n{{plan}}";
  spec.steps.push_back({code, KeyMapping(std::vector<KeyMapping::Entry>{{"plan", "plan"}})});
  auto f = create_flow(make_config("Plan-Code", spec));

  BackendMap backends;
  auto plan_backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"step one"});
  auto code_backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"```python\nprint(1)\n```"});
  backends.bind("plan", plan_backend);
  backends.bind("code", code_backend);
  const auto r = run_traced(*f, {{"problem", "sum"}}, &backends);

  EXPECT_EQ(code_backend->requests().at(0).turns.back().content, "sum\n\nstep one");
  std::string plan_out;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::message_out && e.body.at("message").at("payload").contains("plan") &&
        !e.body.at("message").at("payload").contains("api_output")) {
      plan_out = e.body.at("message").at("id").get<std::string>();
    }
  }
  ASSERT_FALSE(plan_out.empty());
  EXPECT_TRUE(reaches(lineage(r.events), r.output.id().str(), plan_out));
}

TEST(Sequential, FailureNamesStep) {
  SequentialSpec spec;
  spec.steps.push_back({fixed_reply("ok", "x"), {}});
  FlowConfig bad = fixed_reply("bad", "x");
  bad.input_keys = {"absent"};
  spec.steps.push_back({bad, {}});
  auto f = create_flow(make_config("seq", spec));
  try {
    run_traced(*f, {});
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), FlowErrorKind::missing_input);
    ASSERT_FALSE(e.context().empty());
    EXPECT_NE(e.context().back().find("step 2"), std::string::npos);
  }
}

CircularSpec circular_of(FlowConfig child, int max_rounds, std::optional<TerminationPredicate> exit = {}) {
  CircularSpec spec;
  spec.steps.push_back({std::move(child), {}});
  spec.max_rounds = max_rounds;
  spec.exit = std::move(exit);
  return spec;
}

TEST(Circular, SingleRoundMatchesSequential) {
  auto circ = create_flow(make_config("c", circular_of(fixed_reply("f", "x"), 1)));
  SequentialSpec seq_spec;
  seq_spec.steps.push_back({fixed_reply("f", "x"), {}});
  auto seq = create_flow(make_config("s", seq_spec));
  Payload expected = run_traced(*seq, {{"a", 1}}).output.payload();
  expected.emplace(std::string(kRoundsUsedKey), 1);
  EXPECT_EQ(run_traced(*circ, {{"a", 1}}).output.payload(), expected);
}

TEST(Circular, ExitOnSecondRound) {
  auto f = create_flow(make_config(
      "c", circular_of(llm_to("g", "done", "default"), 5,
                       TerminationPredicate{"done", TerminationPredicate::Mode::equals, "yes"})));
  BackendMap backends(std::make_shared<ScriptedBackend>(std::vector<std::string>{"no", "yes", "no"}));
  EXPECT_EQ(rounds_used(run_traced(*f, {}, &backends).output.payload()), 2);
}

TEST(Circular, CapEnforced) {
  auto f = create_flow(make_config(
      "c", circular_of(fixed_reply("f", "no", "done"), 3,
                       TerminationPredicate{"done", TerminationPredicate::Mode::equals, "yes"})));
  const auto r = run_traced(*f, {});
  EXPECT_EQ(rounds_used(r.output.payload()), 3);
  EXPECT_EQ(starts_of(r.events, "f"), 3);
}

TEST(Circular, RejectsZeroRounds) {
  EXPECT_THROW(create_flow(make_config("c", circular_of(fixed_reply("f", "x"), 0))), ConfigError);
}

GeneratorCriticSpec gc_spec(int max_rounds) {
  GeneratorCriticSpec spec;
  spec.generator = llm_to("gen", "answer", "gen");
  spec.critic = fixed_reply("critic", "try again", "feedback");
  spec.max_rounds = max_rounds;
  spec.stop_on = TerminationPredicate{"answer", TerminationPredicate::Mode::contains, "Final answer."};
  spec.feedback_mapping = KeyMapping(std::vector<KeyMapping::Entry>{{"feedback", "feedback"}});
  return spec;
}

struct GcRun {
  testing::RunResult result;
  std::size_t generator_calls;
};

GcRun run_gc(const GeneratorCriticSpec& spec, std::vector<std::string> replies) {
  auto f = create_flow(make_config("gc", spec));
  auto backend = std::make_shared<ScriptedBackend>(std::move(replies));
  BackendMap backends;
  backends.bind("gen", backend);
  auto r = run_traced(*f, {{"problem", "p"}}, &backends);
  return {std::move(r), backend->call_count()};
}

TEST(GeneratorCritic, OneRoundIsBareGenerator) {
  const auto gc = run_gc(gc_spec(1), {"draft"});
  EXPECT_EQ(gc.generator_calls, 1u);
  EXPECT_EQ(starts_of(gc.result.events, "critic"), 0);
  auto bare = create_flow(llm_to("gen", "answer", "gen"));
  BackendMap backends;
  backends.bind("gen", std::make_shared<ScriptedBackend>(std::vector<std::string>{"draft"}));
  EXPECT_EQ(strip_reserved(gc.result.output.payload()), run_traced(*bare, {{"problem", "p"}}, &backends).output.payload());
  EXPECT_EQ(rounds_used(gc.result.output.payload()), 1);
}

TEST(GeneratorCritic, StopsOnFinalAnswer) {
  const auto gc = run_gc(gc_spec(4), {"draft", "looks good. Final answer.", "unused"});
  EXPECT_EQ(rounds_used(gc.result.output.payload()), 2);
  EXPECT_EQ(gc.generator_calls, 2u);
  EXPECT_EQ(starts_of(gc.result.events, "critic"), 1);
  EXPECT_EQ(gc.result.output.payload().at("answer"), "looks good. Final answer.");
}

TEST(GeneratorCritic, NeverTerminatingUsesAllRounds) {
  const auto gc = run_gc(gc_spec(4), {"a", "b", "c", "d", "e"});
  EXPECT_EQ(rounds_used(gc.result.output.payload()), 4);
  EXPECT_EQ(starts_of(gc.result.events, "gen"), 4);
  EXPECT_EQ(starts_of(gc.result.events, "critic"), 3);
}

TEST(GeneratorCritic, FeedbackReachesNextGeneratorPrompt) {
  auto spec = gc_spec(2);
  spec.generator.params["human_message"] = "{{feedback}}";
  auto f = create_flow(make_config("gc", spec));
  auto backend = std::make_shared<ScriptedBackend>(std::vector<std::string>{"a", "b"});
  BackendMap backends;
  backends.bind("gen", backend);
  run_traced(*f, {{"problem", "p"}}, &backends);
  const auto reqs = backend->requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[1].turns.back().content, "try again");
  EXPECT_EQ(reqs[1].turns.size(), 3u);  // query, answer, feedback
}

TEST(GeneratorCritic, CriticStopEndsWithoutAnotherGeneration) {
  auto spec = gc_spec(4);
  spec.stop_on.reset();
  spec.critic = fixed_reply("critic", "AllPassed", "verdict");
  spec.critic_stop_on = TerminationPredicate{"verdict", TerminationPredicate::Mode::equals, "AllPassed"};
  spec.feedback_mapping = {};
  const auto gc = run_gc(spec, {"a", "b"});
  EXPECT_EQ(gc.generator_calls, 1u);
  EXPECT_EQ(starts_of(gc.result.events, "critic"), 1);
  EXPECT_EQ(rounds_used(gc.result.output.payload()), 1);
}

TEST(GeneratorCritic, FailureNamesRoleAndRound) {
  try {
    run_gc(gc_spec(3), {"a"});
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), FlowErrorKind::backend);
    ASSERT_FALSE(e.context().empty());
    EXPECT_NE(e.context().back().find("round 2 generator"), std::string::npos);
  }
}

TEST(Nesting, SequentialOfCircularEqualsCircular) {
  const auto circ_spec = circular_of(fixed_reply("f", "no", "done"), 2,
                                     TerminationPredicate{"done", TerminationPredicate::Mode::equals, "yes"});
  auto circ = create_flow(make_config("c", circ_spec));
  SequentialSpec outer;
  outer.steps.push_back({make_config("c", circ_spec), {}});
  auto seq = create_flow(make_config("s", outer));
  EXPECT_EQ(run_traced(*seq, {{"a", 1}}).output.payload(), run_traced(*circ, {{"a", 1}}).output.payload());
}

TEST(Nesting, DeepCompositesRoundTripThroughConfig) {
  GeneratorCriticSpec inner = gc_spec(2);
  SequentialSpec mid;
  mid.steps.push_back({make_config("gc", inner), {}});
  CircularSpec outer = circular_of(make_config("mid", mid), 1);
  const FlowConfig cfg = make_config("outer", outer);
  EXPECT_EQ(FlowConfig::from_value(Value::parse(canonical_dump(cfg.to_value()))), cfg);
  EXPECT_EQ(make_config("gc", parse_generator_critic(parse_sequential(parse_circular(cfg).steps[0].flow).steps[0].flow)),
            make_config("gc", inner));
}

}  // namespace
}  // namespace flows
