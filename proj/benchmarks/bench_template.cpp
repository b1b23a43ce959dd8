#include <benchmark/benchmark.h>

#include <flows/template.hpp>

namespace {

const std::string kTemplate =
    "# Problem statement\n{{problem_description}}\n\n{{io_description}}\n\n{{constraints}}\n\n"
    "{{python_examples}}\n\nThe input should be read from the standard input and the output should be "
    "passed to the standard output.\n";

flows::Payload vars(std::size_t size) {
  const std::string body(size, 'x');
  return {{"problem_description", body},
          {"io_description", body},
          {"constraints", body},
          {"python_examples", body}};
}

void BM_RenderTemplate(benchmark::State& state) {
  const auto v = vars(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flows::render_template(kTemplate, v));
  state.SetBytesProcessed(state.iterations() * 4 * state.range(0));
}
BENCHMARK(BM_RenderTemplate)->Range(64, 64 << 10);

void BM_TemplatePlaceholders(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(flows::template_placeholders(kTemplate));
}
BENCHMARK(BM_TemplatePlaceholders);

}  // namespace

BENCHMARK_MAIN();
