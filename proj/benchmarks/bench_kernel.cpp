#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "dhym/angle_kernel.hpp"
#include "dhym/functionals.hpp"
#include "dhym/oracles.hpp"

namespace {

using namespace dhym;

std::vector<HermitianMatrix> random_matrices(int n, std::size_t count) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<HermitianMatrix> out;
  for (std::size_t k = 0; k < count; ++k) {
    HermitianMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
      m(i, i) = Complex(u(rng) + 2.5, 0.0);
      for (int j = i + 1; j < n; ++j) {
        m(i, j) = Complex(u(rng), u(rng)) * 0.3;
        m(j, i) = std::conj(m(i, j));
      }
    }
    out.push_back(m);
  }
  return out;
}

void BM_Eigenvalues(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mats = random_matrices(n, 1024);
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(eigenvalues_descending(mats[k++ & 1023]));
}
BENCHMARK(BM_Eigenvalues)->DenseRange(1, 3);

void BM_PointSpectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mats = random_matrices(n, 1024);
  const HermitianMatrix g = HermitianMatrix::Identity(n, n);
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(point_spectrum(mats[k++ & 1023], g));
}
BENCHMARK(BM_PointSpectrum)->DenseRange(1, 3);

void BM_MixedWedgeRatios(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mats = random_matrices(n, 1024);
  const HermitianMatrix g = HermitianMatrix::Identity(n, n);
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixed_wedge_ratios(mats[k & 1023], mats[(k + 1) & 1023], g));
    ++k;
  }
}
BENCHMARK(BM_MixedWedgeRatios)->DenseRange(1, 3);

void BM_CharPolyOracle(benchmark::State& state) {
  const auto mats = random_matrices(3, 1024);
  const HermitianMatrix g = HermitianMatrix::Identity(3, 3);
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(oracles::char_poly_eigenvalues(mats[k++ & 1023], g));
}
BENCHMARK(BM_CharPolyOracle);

void BM_ConcavitySampler(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(oracles::concavity_sampler(3, 3.0, 1000, 1));
}
BENCHMARK(BM_ConcavitySampler)->Unit(benchmark::kMillisecond);

}  // namespace
