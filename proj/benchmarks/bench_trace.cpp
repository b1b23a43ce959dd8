#include <benchmark/benchmark.h>

#include <flows/trace.hpp>

namespace {

std::vector<flows::TraceEvent> synthetic(std::size_t n) {
  flows::MemoryTraceSink sink;
  const flows::InstanceId who("inst-0000000000000001");
  for (std::size_t i = 0; i < n; ++i) {
    flows::Value msg{{"id", "msg-" + std::to_string(i)},
                     {"created_at", "2024-01-01T00:00:00.000000Z"},
                     {"created_by", who.str()},
                     {"parents", flows::Value::array({"msg-" + std::to_string(i ? i - 1 : 0)})},
                     {"payload", {{"api_output", std::string(200, 'y')}}}};
    sink.record(i % 2 ? flows::EventKind::message_out : flows::EventKind::message_in, who,
                flows::Value{{"message", std::move(msg)}});
  }
  return sink.events();
}

void BM_NormalizeTrace(benchmark::State& state) {
  const auto events = synthetic(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flows::normalize_trace(events));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NormalizeTrace)->Arg(100)->Arg(1000);

void BM_RecordEvent(benchmark::State& state) {
  flows::MemoryTraceSink sink;
  const flows::InstanceId who("inst-1");
  for (auto _ : state) sink.record(flows::EventKind::warning, who, flows::Value{{"message", "x"}});
}
BENCHMARK(BM_RecordEvent);

}  // namespace

BENCHMARK_MAIN();
