#include <benchmark/benchmark.h>

#include "gda/crra.hpp"
#include "gda/equilibrium.hpp"
#include "gda/preference.hpp"
#include "gda/surface.hpp"
#include "gda/verification.hpp"

using namespace gda;

namespace {

MarketModel reference_market() { return MarketModel::constant_1d(3.0, 0.06, 0.3); }

void BM_SolveH(benchmark::State& state) {
  const GdaSurface s(Utility::crra(1.0), {0.5, 0.9});
  double x = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.solve_H(x, 0.0));
    x = x == 0.3 ? 0.31 : 0.3;
  }
}
BENCHMARK(BM_SolveH);

void BM_SurfacePoint(benchmark::State& state) {
  const GdaSurface s(Utility::crra(2.0), {0.5, 1.2});
  for (auto _ : state) benchmark::DoNotOptimize(s.evaluate(0.3, 0.05));
}
BENCHMARK(BM_SurfacePoint);

void BM_GdaValue(benchmark::State& state) {
  const Utility u = Utility::crra(1.0);
  const auto dist = LogNormal::from_vy(0.09, 0.06);
  for (auto _ : state) benchmark::DoNotOptimize(gda_value(u, {0.5, 0.9}, dist));
}
BENCHMARK(BM_GdaValue);

void BM_EquilibriumCrra(benchmark::State& state) {
  const auto market = reference_market();
  const auto grid = make_time_grid(market, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(equilibrium_crra({1.0, 0.5, 0.9}, market, grid));
}
BENCHMARK(BM_EquilibriumCrra)->Unit(benchmark::kMillisecond);

void BM_SolveEquilibrium(benchmark::State& state) {
  const auto market = reference_market();
  const Utility u = Utility::crra(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(u, {0.5, 0.9}, market));
}
BENCHMARK(BM_SolveEquilibrium)->Unit(benchmark::kMillisecond);

void BM_EquilibriumHdra(benchmark::State& state) {
  const auto market = reference_market();
  for (auto _ : state)
    benchmark::DoNotOptimize(equilibrium_hdra({1.0, 0.5, 0.9}, HdraSpec::affine(1.0, 0.5), market));
}
BENCHMARK(BM_EquilibriumHdra)->Unit(benchmark::kMillisecond);

void BM_McGdaValue(benchmark::State& state) {
  McConfig mc;
  mc.n_paths = static_cast<std::size_t>(state.range(0));
  const Utility u = Utility::crra(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mc_gda_value(u, {0.5, 0.9}, LogNormal::from_vy(0.09, 0.06), mc));
}
BENCHMARK(BM_McGdaValue)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_Certify(benchmark::State& state) {
  const auto market = reference_market();
  const Utility u = Utility::crra(1.0);
  const auto path = equilibrium_crra({1.0, 0.5, 0.9}, market, make_time_grid(market, 0.01));
  for (auto _ : state) benchmark::DoNotOptimize(certify(u, {0.5, 0.9}, market, path, {0.0, 1.0, 2.0, 2.99}));
}
BENCHMARK(BM_Certify)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
