#include <benchmark/benchmark.h>

#include "ellshrink/elliptical.hpp"
#include "ellshrink/posterior.hpp"
#include "ellshrink/risk.hpp"

using namespace ellshrink;

namespace {

Dataset gaussian_dataset(int p, int n) {
  auto rng = substream(1, 0);
  return Dataset(sample_errors(MixingMeasure::gaussian(), SpdMatrix::identity(p), n, rng));
}

void BM_SufficientStats(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const auto data = gaussian_dataset(p, 4 * p);
  for (auto _ : state) benchmark::DoNotOptimize(sufficient_stats(data));
}
BENCHMARK(BM_SufficientStats)->Arg(5)->Arg(20)->Arg(80);

void BM_Wishart(benchmark::State& state) {
  const auto p = state.range(0);
  const auto sigma = spd_ar1(p, 0.5);
  std::uint64_t k = 0;
  for (auto _ : state) {
    auto rng = substream(2, k++);
    benchmark::DoNotOptimize(sample_wishart(sigma, p + 10, rng));
  }
}
BENCHMARK(BM_Wishart)->Arg(5)->Arg(20)->Arg(80);

void BM_Philox(benchmark::State& state) {
  auto rng = substream(3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

void BM_RiskReplicates(benchmark::State& state) {
  const Scenario scn(20, SpdMatrix::identity(5), Vector::Zero(5), MixingMeasure::student_t(6));
  const auto est = EstimatorSpec::baranchik(alam_thompson_r(5, 20, 1.0));
  const MonteCarloOptions opts{static_cast<unsigned>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(mc_risk(scn, est, 10000, 4, opts));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_RiskReplicates)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_PosteriorLogpdf(benchmark::State& state) {
  const PosteriorT post(sufficient_stats(gaussian_dataset(5, 20)));
  const Vector theta = Vector::Constant(5, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_logpdf(theta, post));
}
BENCHMARK(BM_PosteriorLogpdf);

}  // namespace

BENCHMARK_MAIN();
