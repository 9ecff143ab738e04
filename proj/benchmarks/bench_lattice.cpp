#include <benchmark/benchmark.h>

#include "dhym/lattice.hpp"
#include "dhym/oracles.hpp"

namespace {

using namespace dhym;

ScalarField sample_field(int n, int N) { return oracles::random_band_limited(build_domain(n, N), 3, 6, 0.01, 1); }

void BM_Spectrum(benchmark::State& state) {
  const ScalarField u = sample_field(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Spectrum(u));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(u.size()));
}
BENCHMARK(BM_Spectrum)->Args({1, 32})->Args({2, 16})->Args({2, 24})->Args({3, 8})->Unit(benchmark::kMicrosecond);

void BM_ComplexHessian(benchmark::State& state) {
  const ScalarField u = sample_field(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const Spectrum u_hat(u);
  for (auto _ : state) benchmark::DoNotOptimize(complex_hessian(u_hat));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(u.size()));
}
BENCHMARK(BM_ComplexHessian)->Args({1, 32})->Args({2, 16})->Args({2, 24})->Args({3, 8})->Unit(benchmark::kMicrosecond);

void BM_GradientNorm(benchmark::State& state) {
  const ScalarField u = sample_field(2, static_cast<int>(state.range(0)));
  const Spectrum u_hat(u);
  for (auto _ : state) benchmark::DoNotOptimize(holomorphic_gradient_norm(u_hat));
}
BENCHMARK(BM_GradientNorm)->Arg(16)->Arg(24)->Unit(benchmark::kMicrosecond);

void BM_Integrate(benchmark::State& state) {
  const ScalarField u = sample_field(2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(integrate(u));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(u.size()));
}
BENCHMARK(BM_Integrate)->Arg(16)->Unit(benchmark::kMicrosecond);

}  // namespace
