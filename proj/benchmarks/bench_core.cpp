#include <benchmark/benchmark.h>

#include <vector>

#include "otrsens/boosting.hpp"
#include "otrsens/datagen.hpp"
#include "otrsens/nuisance.hpp"
#include "otrsens/policy_learner.hpp"
#include "otrsens/rng.hpp"
#include "otrsens/sensitivity.hpp"
#include "otrsens/weights.hpp"

using namespace otrsens;

static void BM_GammaMc(benchmark::State& state) {
  const auto params = SensitivityParams::y_only(0.5, 0.5);
  const std::vector<double> x{0.2, -0.4};
  Rng rng(1, 0, Stream::kMonteCarlo);
  const auto n_mc = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gamma_mc(params, 1, 1, x, [](Rng& r) { return r.normal(1.0, 0.5); }, n_mc, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GammaMc)->Arg(1000)->Arg(10000);

static void BM_FitAndTabulate(benchmark::State& state) {
  GenerativeConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const Trial trial = generate_trial(cfg, 2, 0);
  const auto masks = full_masks(cfg.dim_x);
  for (auto _ : state) {
    Rng mc(3, 0, Stream::kMonteCarlo);
    const auto ns = NuisanceSet::fit(trial.data, masks, NuisanceOptions{}, mc);
    benchmark::DoNotOptimize(tabulate(ns, trial.data, cfg.truth));
  }
}
BENCHMARK(BM_FitAndTabulate)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_BoostedTrees(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4, 0, Stream::kTest);
  DesignMatrix features(n, 3);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3; ++j) features(i, j) = rng.uniform(-1, 1);
    y[i] = features(i, 0) * features(i, 1) + (features(i, 2) > 0 ? 1.0 : 0.0) + rng.normal(0.0, 0.1);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(BoostedTrees::fit(features, y, BoostingConfig{}));
  }
}
BENCHMARK(BM_BoostedTrees)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_LearnPolicy(benchmark::State& state) {
  GenerativeConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const Trial trial = generate_trial(cfg, 5, 0);
  WeightVector w;
  Rng rng(6, 0, Stream::kTest);
  for (const auto& o : trial.data) {
    w.values.push_back(rng.normal(0.2 * o.z * o.x[0], 1.0));
    w.labels.push_back(o.z);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn_policy(trial.data, w, LearnerConfig{}));
  }
}
BENCHMARK(BM_LearnPolicy)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
