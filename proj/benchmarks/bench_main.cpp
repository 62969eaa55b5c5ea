#include <benchmark/benchmark.h>

#include <cstdio>
#include <random>

#include "skillmix/catalog.hpp"
#include "skillmix/generator.hpp"
#include "skillmix/judge.hpp"
#include "skillmix/mixer.hpp"

namespace {

using namespace skillmix;

SkillCatalog catalog_of(std::size_t n) {
  SkillCatalog c(CatalogMode::kSdd);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "skill_%05zu", i);
    c.add_skill({buf, CatalogMode::kSdd, std::nullopt});
  }
  return c;
}

void BM_SampleTuples(benchmark::State& state) {
  const auto catalog = catalog_of(1132);
  const SamplePlan plan{.n = static_cast<std::size_t>(state.range(0)), .k = static_cast<std::size_t>(state.range(1)),
                        .seed = 42};
  for (auto _ : state) benchmark::DoNotOptimize(sample_tuples(catalog, plan));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleTuples)->Args({1000, 2})->Args({10000, 2})->Args({10000, 5});

// Dense path: the request covers most of a small space.
void BM_SampleTuplesDense(benchmark::State& state) {
  const auto catalog = catalog_of(60);
  const SamplePlan plan{.n = 1700, .k = 2, .seed = 42};
  for (auto _ : state) benchmark::DoNotOptimize(sample_tuples(catalog, plan));
}
BENCHMARK(BM_SampleTuplesDense);

void BM_CombinationCount(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(combination_count(1132, static_cast<std::uint64_t>(state.range(0))));
}
BENCHMARK(BM_CombinationCount)->Arg(2)->Arg(5)->Arg(50);

void BM_FitLengthModel(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gap(100.0, 400.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<int> wins;
  std::vector<double> diffs;
  for (int i = 0; i < state.range(0); ++i) {
    const double d = gap(rng);
    diffs.push_back(d);
    wins.push_back(u(rng) < 1.0 / (1.0 + std::exp(-(0.2 + d / 400.0))) ? 1 : 0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_length_model(wins, diffs));
}
BENCHMARK(BM_FitLengthModel)->Arg(200)->Arg(805)->Arg(10000);

void BM_ParseExample(benchmark::State& state) {
  std::string text = "### Skills: a, b\n### Instruction:\ndraft\n### Response:\ndraft\n";
  text += "### Instruction:\n" + std::string(400, 'q') + "?\n### Response:\n";
  for (int i = 0; i < 60; ++i) text += "A sentence of the refined response. ";
  for (auto _ : state) benchmark::DoNotOptimize(parse_example(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseExample);

void BM_ParseJudgeReply(benchmark::State& state) {
  const std::string replies[] = {"A", "**B**", "Output (A) is more helpful.", "Answer: B", "B. Better detail."};
  for (auto _ : state) {
    for (const auto& r : replies) benchmark::DoNotOptimize(parse_judge_reply(r));
  }
}
BENCHMARK(BM_ParseJudgeReply);

}  // namespace

BENCHMARK_MAIN();
