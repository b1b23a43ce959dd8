#include <benchmark/benchmark.h>

#include <flows/backend.hpp>
#include <flows/compose.hpp>
#include <flows/registry.hpp>
#include <flows/trace.hpp>

namespace {

flows::FlowConfig generator(int rounds) {
  flows::FlowConfig gen;
  gen.name = "gen";
  gen.kind = "llm";
  gen.output_keys = {"answer"};
  gen.params = flows::Value{{"backend", "gen"}, {"query_message", "{{problem}}"}, {"human_message", "{{feedback}}"},
                            {"output_key", "answer"}};
  flows::FlowConfig critic;
  critic.name = "critic";
  critic.kind = "fixed_reply";
  critic.output_keys = {"feedback"};
  critic.params = flows::Value{{"reply", "try again"}, {"output_key", "feedback"}};
  flows::GeneratorCriticSpec spec;
  spec.generator = gen;
  spec.critic = critic;
  spec.max_rounds = rounds;
  spec.feedback_mapping = flows::KeyMapping(std::vector<flows::KeyMapping::Entry>{{"feedback", "feedback"}});
  return flows::make_config("gc", spec);
}

void BM_GeneratorCriticRun(benchmark::State& state) {
  const int rounds = static_cast<int>(state.range(0));
  auto flow = flows::create_flow(generator(rounds));
  for (auto _ : state) {
    auto backend = std::make_shared<flows::ScriptedBackend>(std::vector<std::string>(rounds, "draft"));
    flows::BackendMap backends(backend);
    flows::MemoryTraceSink sink;
    flows::RunContext ctx;
    ctx.trace = &sink;
    ctx.backends = &backends;
    flow->reset_state();
    benchmark::DoNotOptimize(flow->run(flows::package_input({{"problem", "p"}}, flows::InstanceId("bench"), {}), ctx));
  }
}
BENCHMARK(BM_GeneratorCriticRun)->DenseRange(1, 6, 5);

void BM_CreateFlow(benchmark::State& state) {
  const auto config = generator(4);
  for (auto _ : state) benchmark::DoNotOptimize(flows::create_flow(config));
}
BENCHMARK(BM_CreateFlow);

}  // namespace

BENCHMARK_MAIN();
