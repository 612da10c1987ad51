// Serial reference vs OpenMP kernels, plus the model products built on them.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ddsim/influence.hpp"
#include "ddsim/kernels.hpp"
#include "ddsim/model.hpp"
#include "ddsim/random.hpp"

namespace {

using namespace ddsim;

ObservationTable make_table(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(42);
  ObservationTable t;
  t.features = FeatureMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      t.features(i, j) = standard_normal(rng);
      s += (j % 2 ? -1.0 : 1.0) * t.features(i, j);
    }
    t.labels.push_back(s + standard_normal(rng) > 0 ? 1.0 : -1.0);
    t.contributor_ids.push_back(std::to_string(i));
    t.row_ids.push_back(i);
  }
  return t;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1e-3 * static_cast<double>(i % 97) - 0.04;
  return v;
}

void BM_WeightedRowSumSerial(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  const auto coef = ramp(t.size());
  std::vector<double> out(t.dim() + 1);
  for (auto _ : state) {
    kernels::serial::weighted_row_sum(t.features, coef, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_WeightedRowSumParallel(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  const auto coef = ramp(t.size());
  std::vector<double> out(t.dim() + 1);
  for (auto _ : state) {
    kernels::weighted_row_sum(t.features, coef, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_AffineScoresSerial(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  const auto params = ramp(t.dim() + 1);
  std::vector<double> out(t.size());
  for (auto _ : state) {
    kernels::serial::affine_scores(t.features, params, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_AffineScoresParallel(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  const auto params = ramp(t.dim() + 1);
  std::vector<double> out(t.size());
  for (auto _ : state) {
    kernels::affine_scores(t.features, params, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_Gradient(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  ModelSpec spec;
  const auto theta = ramp(t.dim() + 1);
  for (auto _ : state) benchmark::DoNotOptimize(total_gradient(spec, theta, t, true));
}

void BM_HessianVector(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  ModelSpec spec;
  const auto theta = ramp(t.dim() + 1);
  const auto v = ramp(t.dim() + 1);
  for (auto _ : state) benchmark::DoNotOptimize(hessian_vector_product(spec, theta, t, v));
}

void BM_InfluenceDeltas(benchmark::State& state) {
  const auto t = make_table(static_cast<std::size_t>(state.range(0)), 30);
  const auto test = make_table(static_cast<std::size_t>(state.range(0)) / 4, 30);
  ModelSpec spec;
  spec.l2 = 1e-2;
  const auto model = train(spec, t);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_loo_deltas(model, t, test, {}));
}

BENCHMARK(BM_WeightedRowSumSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_WeightedRowSumParallel)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_AffineScoresSerial)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_AffineScoresParallel)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_Gradient)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_HessianVector)->Arg(1 << 12)->Arg(1 << 16);
BENCHMARK(BM_InfluenceDeltas)->Arg(1 << 12);

}  // namespace

BENCHMARK_MAIN();
