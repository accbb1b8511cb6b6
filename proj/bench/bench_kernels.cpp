// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "falsify/config.hpp"
#include "falsify/kernels.hpp"

namespace {

using namespace falsify;

const Problem& reference_problem() {
  static const Problem problem = load_config(FALSIFY_REFERENCE_CONFIG).make_problem();
  return problem;
}

std::vector<ConcreteScenario> scenarios(std::size_t n) {
  Rng rng(7);
  std::vector<ConcreteScenario> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_scenario(reference_problem().space, rng));
  return out;
}

Problem small_problem() {
  RunConfig cfg;
  for (auto& p : cfg.parameters) p.sample_count = 4;
  return cfg.make_problem();
}

void BM_EvaluateBatchSerial(benchmark::State& state) {
  const auto batch = scenarios(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch_serial(reference_problem(), batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateBatchParallel(benchmark::State& state) {
  const auto batch = scenarios(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch_parallel(reference_problem(), batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LabelSerial(benchmark::State& state) {
  const auto problem = small_problem();
  for (auto _ : state) benchmark::DoNotOptimize(label_violations_serial(problem));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(problem.space.cardinality()));
}

void BM_LabelParallel(benchmark::State& state) {
  const auto problem = small_problem();
  for (auto _ : state) benchmark::DoNotOptimize(label_violations_parallel(problem));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(problem.space.cardinality()));
}

struct GradientFixture {
  Policy policy;
  std::vector<BatchItem> batch;
};

GradientFixture gradient_fixture(std::size_t n) {
  Rng rng(3);
  GradientFixture f{Policy::initialized({reference_problem().space.bin_counts(), 64, 1}, rng), {}};
  std::vector<std::size_t> prev(5, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = sample_action(forward(f.policy, prev).probs, rng);
    f.batch.push_back({prev, s.indices, 0.01 * static_cast<double>(i % 7)});
    prev = s.indices;
  }
  return f;
}

void BM_GradientSerial(benchmark::State& state) {
  const auto f = gradient_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(policy_gradient_serial(f.policy, f.batch, 0.02));
}

void BM_GradientParallel(benchmark::State& state) {
  const auto f = gradient_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(policy_gradient_parallel(f.policy, f.batch, 0.02));
}

}  // namespace

BENCHMARK(BM_EvaluateBatchSerial)->Arg(25)->Arg(256);
BENCHMARK(BM_EvaluateBatchParallel)->Arg(25)->Arg(256);
BENCHMARK(BM_LabelSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LabelParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientSerial)->Arg(25)->Arg(100);
BENCHMARK(BM_GradientParallel)->Arg(25)->Arg(100);

BENCHMARK_MAIN();
