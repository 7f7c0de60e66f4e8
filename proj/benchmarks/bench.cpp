#include <benchmark/benchmark.h>

#include <vector>

#include "cifboot/estimators.hpp"
#include "cifboot/resampling.hpp"
#include "cifboot/simulation.hpp"
#include "cifboot/two_sample.hpp"

using namespace cifboot;

namespace {

CountingProcessPanel panel(const HazardModel& model, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return compile_panel(simulate_sample(model, n, 0.5, rng));
}

void BM_CompilePanel(benchmark::State& state) {
  Rng rng(1);
  const auto sample = simulate_sample(HazardModel::group1_exp(), state.range(0), 0.5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(compile_panel(sample));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CompilePanel)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_Estimators(benchmark::State& state) {
  const auto p = panel(HazardModel::group1_exp(), state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(trace_estimators(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Estimators)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_ZetaSurface(benchmark::State& state) {
  const auto p = panel(HazardModel::group1_exp(), state.range(0), 3);
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(0.075 * k);
  for (auto _ : state) benchmark::DoNotOptimize(zeta_hat(p, grid));
}
BENCHMARK(BM_ZetaSurface)->Arg(100)->Arg(1000);

// One bootstrap replicate on precomputed pooled entries: weights, T*, V*^2.
// (Efron weights arrive centred, m - 1.)
void BM_Replicate(benchmark::State& state) {
  const bool efron = state.range(1) != 0;
  const std::size_t n = state.range(0);
  const auto p1 = panel(HazardModel::group1_exp(), n, 4);
  const auto p2 = panel(HazardModel::constant_pair(0.7), n, 5);
  const TestConfig cfg;
  const auto interval = effective_interval(p1, p2, cfg);
  const auto z = pool_z(build_z(p1), build_z(p2), interval, cfg.rho);
  const auto scheme = efron ? WeightScheme::efron() : WeightScheme::wild_normal();
  std::vector<double> w(z.integrals.size()), v(z.integrals.size());
  Rng rng(6);
  for (auto _ : state) {
    fill_weights(scheme, rng, w);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = efron ? w[i] + 1.0 : w[i] * w[i];
    benchmark::DoNotOptimize(bootstrap_statistic(z, w, efron));
    benchmark::DoNotOptimize(bootstrap_variance(z, v, efron));
  }
}
BENCHMARK(BM_Replicate)->ArgsProduct({{100, 1000}, {0, 1}})->ArgNames({"n", "efron"});

void BM_Tests(benchmark::State& state) {
  const auto p1 = panel(HazardModel::group1_exp(), 100, 7);
  const auto p2 = panel(HazardModel::constant_pair(0.7), 100, 8);
  TestConfig cfg;
  cfg.B = 999;
  cfg.scheme = state.range(0) ? WeightScheme::efron() : WeightScheme::wild_normal();
  for (auto _ : state) benchmark::DoNotOptimize(test_phi_star(p1, p2, cfg));
}
BENCHMARK(BM_Tests)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Scenario(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.suite = "bench";
  cfg.model1 = HazardModel::group1_exp();
  cfg.model2 = HazardModel::constant_pair(1.0);
  cfg.n1 = cfg.n2 = 50;
  cfg.n_sim = 20;
  cfg.B = 199;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(cfg, 1));
}
BENCHMARK(BM_Scenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
