#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include <flows/cache.hpp>
#include <flows/cc_flows.hpp>
#include <flows/compose.hpp>
#include <flows/replay.hpp>

#include "test_support.hpp"

namespace flows {
namespace {

using testing::fixed_reply;
using testing::fixture_dir;
using testing::run_traced;
using testing::TempDir;

std::vector<EventKind> kinds(const std::vector<TraceEvent>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

TEST(Record, AtomicRunOrder) {
  FlowConfig c = testing::echo_llm("llm");
  c.params["keep_history"] = false;
  auto f = create_flow(c);
  BackendMap backends(std::make_shared<ScriptedBackend>(std::vector<std::string>{"A"}));
  using K = EventKind;
  EXPECT_EQ(kinds(run_traced(*f, {}, &backends).events),
            (std::vector<K>{K::flow_start, K::message_in, K::backend_call, K::backend_response, K::message_out,
                            K::flow_end}));
}

TEST(Record, HistoryWritesAreTraced) {
  auto f = create_flow(testing::echo_llm("llm"));
  BackendMap backends(std::make_shared<ScriptedBackend>(std::vector<std::string>{"A"}));
  const auto events = run_traced(*f, {}, &backends).events;
  ASSERT_EQ(events.size(), 7u);
  EXPECT_EQ(events[4].kind, EventKind::state_update);
  EXPECT_EQ(events[4].body.at("key"), "history");
}

TEST(Record, NestedStartsInsideParent) {
  SequentialSpec spec;
  spec.steps.push_back({fixed_reply("child", "x"), {}});
  auto f = create_flow(make_config("parent", spec));
  const auto events = run_traced(*f, {}).events;
  ASSERT_GE(events.size(), 4u);
  EXPECT_EQ(events.front().kind, EventKind::flow_start);
  EXPECT_EQ(events.front().instance, f->instance_id());
  EXPECT_EQ(events.back().kind, EventKind::flow_end);
  EXPECT_EQ(events.back().instance, f->instance_id());
  std::size_t child_start = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind == EventKind::flow_start && events[i].body.at("name") == "child") child_start = i;
  }
  EXPECT_GT(child_start, 0u);
  EXPECT_LT(child_start, events.size() - 1);
  EXPECT_EQ(events.front().body.at("depth"), 0);
  EXPECT_EQ(events[child_start].body.at("depth"), 1);
  EXPECT_TRUE(events.front().body.contains("config"));
  EXPECT_FALSE(events[child_start].body.contains("config"));
}

TEST(Record, SequenceStartsAtOne) {
  MemoryTraceSink sink;
  sink.record(EventKind::warning, InstanceId("a"), Value{{"message", "x"}});
  sink.record(EventKind::warning, InstanceId("a"), Value{{"message", "y"}});
  const auto events = sink.events();
  EXPECT_EQ(events[0].seq, 1u);
  EXPECT_EQ(events[1].seq, 2u);
}

TEST(Record, ParentsPrecedeReferences) {
  static const auto ps = load_problems(fixture_dir() / "cc6" / "problems");
  auto f = create_flow(build_variant(parse_variant("Plan_Collaboration-Code_Debug_Collab")));
  auto backends = testing::cc6_backends("P2");
  const auto toolchain = sandbox::Toolchain::defaults();
  const auto events = run_traced(*f, problem_payload(ps.at(1)), &backends->map, &toolchain).events;
  std::set<std::string> seen;
  int checked = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::message_in && e.kind != EventKind::message_out) continue;
    const auto& m = e.body.at("message");
    for (const auto& p : m.at("parents")) {
      EXPECT_TRUE(seen.count(p.get<std::string>())) << p;
      ++checked;
    }
    seen.insert(m.at("id").get<std::string>());
  }
  EXPECT_GT(checked, 0);
}

TEST(File, RoundTripAndHeader) {
  TempDir dir;
  const auto path = dir / "nested" / "trace.log";
  std::vector<TraceEvent> written;
  {
    FileTraceSink sink(path);
    auto f = create_flow(fixed_reply("f", "ok"));
    RunContext ctx;
    ctx.trace = &sink;
    f->run(package_input({{"k", "v"}}, InstanceId("t"), {}), ctx);
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(Value::parse(header), (Value{{"format", "flows-trace"}, {"version", 1}}));
  const auto events = read_trace(path);
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events[1].body.at("message").at("payload").at("k"), "v");
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
  EXPECT_EQ(canonical_dump(TraceEvent::from_value(events[2].to_value()).to_value()),
            canonical_dump(events[2].to_value()));
}

TEST(File, UnwritablePathIsRunError) {
  try {
    FileTraceSink sink("/proc/flows-cannot-write/trace.log");
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), FlowErrorKind::trace_io);
  }
}

TEST(File, ReaderValidates) {
  TempDir dir;
  std::ofstream(dir / "bad_header.log") << "{\"format\":\"other\",\"version\":1}\n";
  EXPECT_THROW(read_trace(dir / "bad_header.log"), std::runtime_error);
  MemoryTraceSink sink;
  sink.record(EventKind::warning, InstanceId("a"), Value{{"message", "x"}});
  const auto e = sink.events().front();
  {
    std::ofstream out(dir / "seq.log");
    out << "{\"format\":\"flows-trace\",\"version\":1}\n" << e.to_value().dump() << "\n" << e.to_value().dump() << "\n";
  }
  EXPECT_THROW(read_trace(dir / "seq.log"), std::runtime_error);
}

TEST(Normalize, IdenticalRunsNormalizeEqual) {
  auto once = [] {
    auto f = create_flow(build_variant(parse_variant("Code_Reflection")));
    auto backends = testing::cc6_backends("P4");
    static const auto ps = load_problems(fixture_dir() / "cc6" / "problems");
    Payload input = problem_payload(ps.at(3));
    return normalize_trace(run_traced(*f, input, &backends->map).events);
  };
  const auto a = once();
  const auto b = once();
  EXPECT_EQ(first_trace_difference(a, b), std::nullopt);
  const auto dump = canonical_dump(Value(a));
  EXPECT_EQ(dump.find("created_at"), std::string::npos);
  EXPECT_EQ(dump.find("msg-"), std::string::npos);
  EXPECT_NE(dump.find("\"#1\""), std::string::npos);
}

TEST(Normalize, ReportsFirstDifference) {
  std::vector<Value> a{Value{{"k", 1}}, Value{{"k", 2}}};
  std::vector<Value> b{Value{{"k", 1}}, Value{{"k", 3}}};
  EXPECT_EQ(first_trace_difference(a, b), std::optional<std::size_t>(1));
  EXPECT_EQ(first_trace_difference(a, {a[0]}), std::optional<std::size_t>(1));
}

/// Re-runs the root flow recorded in `events` against its replay backends.
std::vector<TraceEvent> replay(const std::vector<TraceEvent>& events, const sandbox::Toolchain* toolchain) {
  const auto run = recorded_run(events);
  const auto backends = replay_backend(events);
  auto flow = create_flow(run.config);
  MemoryTraceSink sink;
  RunContext ctx;
  ctx.trace = &sink;
  ctx.backends = backends.resolver.get();
  ctx.toolchain = toolchain;
  flow->run(package_input(run.input, run.created_by, {}), ctx);
  return sink.events();
}

const Problem& problem(std::size_t i) {
  static const auto ps = load_problems(fixture_dir() / "cc6" / "problems");
  return ps.at(i);
}

TEST(Replay, FixpointForEveryDefaultVariant) {
  const auto toolchain = sandbox::Toolchain::defaults();
  for (const auto& v : default_variants()) {
    auto f = create_flow(build_variant(v));
    auto backends = testing::cc6_backends("P2");
    const auto original = run_traced(*f, problem_payload(problem(1)), &backends->map, &toolchain).events;
    const auto again = replay(original, &toolchain);
    const auto diff = first_trace_difference(normalize_trace(original), normalize_trace(again));
    EXPECT_EQ(diff, std::nullopt) << v.display_name();
  }
}

TEST(Replay, AlteredPromptDivergesAtFirstCall) {
  auto f = create_flow(build_variant(parse_variant("Code")));
  auto backends = testing::cc6_backends("P1");
  const auto events = run_traced(*f, problem_payload(problem(0)), &backends->map).events;
  auto run = recorded_run(events);
  auto spec = parse_sequential(run.config);
  spec.steps[0].flow.params["system_message"] = "changed";
  const auto replayed = replay_backend(events);
  auto altered = create_flow(make_config(run.config.name, spec));
  MemoryTraceSink sink;
  RunContext ctx;
  ctx.trace = &sink;
  ctx.backends = replayed.resolver.get();
  try {
    altered->run(package_input(run.input, run.created_by, {}), ctx);
    FAIL();
  } catch (const FlowError& e) {
    EXPECT_EQ(e.kind(), FlowErrorKind::replay_divergence);
  }
  int calls = 0;
  for (const auto& e : sink.events()) calls += e.kind == EventKind::backend_call;
  EXPECT_EQ(calls, 1);
}

TEST(Replay, ZeroBackendCalls) {
  auto f = create_flow(fixed_reply("f", "ok"));
  const auto events = run_traced(*f, {{"a", 1}}).events;
  EXPECT_EQ(replay_backend(events).store->remaining(), 0u);
  EXPECT_EQ(first_trace_difference(normalize_trace(events), normalize_trace(replay(events, nullptr))), std::nullopt);
}

TEST(Replay, MissingRootIsAnError) { EXPECT_THROW(recorded_run({}), std::runtime_error); }

TEST(Completeness, CacheHitsAreRecorded) {
  TempDir dir;
  ResponseCache cache(dir.path());
  auto responses = [&] {
    auto f = create_flow(testing::echo_llm("llm"));
    BackendMap backends(std::make_shared<ScriptedBackend>(std::vector<std::string>{"A"}));
    MemoryTraceSink sink;
    RunContext ctx;
    ctx.trace = &sink;
    ctx.backends = &backends;
    ctx.cache = &cache;
    f->run(package_input({}, InstanceId("t"), {}), ctx);
    std::vector<Value> out;
    for (const auto& e : sink.events()) {
      if (e.kind == EventKind::backend_response) out.push_back(e.body);
    }
    return out;
  };
  const auto first = responses();
  const auto second = responses();
  ASSERT_EQ(first.size(), 1u);
  ASSERT_EQ(second.size(), 1u);
  EXPECT_EQ(first[0].at("cached"), false);
  EXPECT_EQ(second[0].at("cached"), true);
  EXPECT_EQ(second[0].at("response"), "A");
}

}  // namespace
}  // namespace flows
