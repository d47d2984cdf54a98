#include "pcadb/estimators.hpp"
#include "pcadb/montecarlo.hpp"
#include "pcadb/sampling.hpp"
#include "pcadb/spectral.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace pcadb;

void BM_Decompose(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Matrix q = random_orthogonal(d, 1);
  const Vector l = Vector::LinSpaced(d, 1.0, static_cast<double>(d));
  const SymMatrix s = SymMatrix::symmetrized(q * l.asDiagonal() * q.transpose());
  for (auto _ : state) benchmark::DoNotOptimize(decompose(s));
}
BENCHMARK(BM_Decompose)->Arg(16)->Arg(64)->Arg(256);

void BM_Draw(benchmark::State& state) {
  const CovarianceModel m = prop32_model(1, 2.0, static_cast<int>(state.range(0)) - 1, 1.0);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(draw(m, 1000, seed++));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Draw)->Arg(10)->Arg(100);

void BM_SampleCovariance(benchmark::State& state) {
  const SampleSet x = draw(prop32_model(1, 2.0, static_cast<int>(state.range(0)) - 1, 1.0), 2000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_covariance(x));
}
BENCHMARK(BM_SampleCovariance)->Arg(10)->Arg(100);

void BM_DebiasedEstimate(benchmark::State& state) {
  const CovarianceModel m = prop32_model(1, 2.0, 50, 1.0);
  const SampleSet x = draw(m, static_cast<int>(state.range(0)), 4);
  const Vector u = Vector::Unit(m.dim(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(debiased_estimate(x, 1, 0.1, u));
}
BENCHMARK(BM_DebiasedEstimate)->Arg(500)->Arg(4000);

void BM_SmallScenario(benchmark::State& state) {
  Scenario s;
  s.model = DiagonalSpec{{3, 1, 0.5}};
  s.u = FunctionalSpec{{}, "e2"};
  s.n = 200;
  s.reps = 50;
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(s, 1));
}
BENCHMARK(BM_SmallScenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
