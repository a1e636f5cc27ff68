#include <array>

#include <benchmark/benchmark.h>

#include "modwalk/distributions.hpp"
#include "modwalk/estimate.hpp"
#include "modwalk/modulation.hpp"
#include "modwalk/oracle.hpp"
#include "modwalk/walk.hpp"

using namespace modwalk;

namespace {

Distribution shifted_pareto() { return Distribution::shifted(Distribution::pareto(1.5, 1.0), -4.5); }

void BM_ParetoQuantile(benchmark::State& st) {
  const auto d = shifted_pareto();
  double u = 0.0;
  for (auto _ : st) {
    u += 0.6180339887498949;
    if (u >= 1.0) u -= 1.0;
    benchmark::DoNotOptimize(d.quantile(u));
  }
}
BENCHMARK(BM_ParetoQuantile);

void BM_LognormalQuantile(benchmark::State& st) {
  const auto d = Distribution::lognormal(0.0, 1.0);
  double u = 0.0;
  for (auto _ : st) {
    u += 0.6180339887498949;
    if (u >= 1.0) u -= 1.0;
    benchmark::DoNotOptimize(d.quantile(u));
  }
}
BENCHMARK(BM_LognormalQuantile);

void BM_WalkerStepIid(benchmark::State& st) {
  const auto m = iid_model(shifted_pareto());
  Walker w(m, 1);
  for (auto _ : st) benchmark::DoNotOptimize(w.step());
}
BENCHMARK(BM_WalkerStepIid);

void BM_WalkerStepTandem(benchmark::State& st) {
  const auto m = tandem_departure_process(Distribution::exponential(1.0 / 3.0), Distribution::exponential(1.0),
                                          Distribution::pareto(2.5, 1.0));
  Walker w(m, 1);
  for (auto _ : st) benchmark::DoNotOptimize(w.step());
}
BENCHMARK(BM_WalkerStepTandem);

void BM_ScanLevels(benchmark::State& st) {
  const auto m = iid_model(shifted_pareto());
  const std::array<double, 3> levels{10.0, 100.0, 1000.0};
  std::uint64_t i = 0;
  for (auto _ : st) {
    Walker w(m, 7, i++);
    benchmark::DoNotOptimize(scan_levels(w, levels, 200.0, m.drift, 1'000'000));
  }
}
BENCHMARK(BM_ScanLevels);

void BM_DpSupTail(benchmark::State& st) {
  const auto lm = LatticeModel::plus_minus_one(1.0 / 3.0);
  for (auto _ : st) benchmark::DoNotOptimize(dp_sup_tail(lm, 10.5, static_cast<double>(st.range(0))));
}
BENCHMARK(BM_DpSupTail)->Arg(40)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
