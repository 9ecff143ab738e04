#include <memory>

#include <benchmark/benchmark.h>

#include "dhym/diagnostics.hpp"
#include "dhym/flow.hpp"
#include "dhym/oracles.hpp"

namespace {

using namespace dhym;

struct Setup {
  std::shared_ptr<const ClosedForm> chi;
  ScalarField u0;
};

Setup perturbed(int N) {
  const DomainPtr d = build_domain(2, N);
  Setup s;
  s.chi = std::make_shared<ClosedForm>(d, HermitianMatrix(2.0 * HermitianMatrix::Identity(2, 2)));
  s.u0 = oracles::random_band_limited(d, 3, 4, 0.002, 3);
  return s;
}

void BM_Realize(benchmark::State& state) {
  const Setup s = perturbed(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(s.chi->realize_with(s.u0));
}
BENCHMARK(BM_Realize)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_ComputeSpectra(benchmark::State& state) {
  const Setup s = perturbed(static_cast<int>(state.range(0)));
  const HermitianMatrixField w = s.chi->realize_with(s.u0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_spectra(w, kDefaultThetaGuard, state.range(1) != 0));
}
BENCHMARK(BM_ComputeSpectra)->Args({16, 0})->Args({16, 1})->Unit(benchmark::kMillisecond);

void BM_Velocity(benchmark::State& state) {
  const Setup s = perturbed(16);
  const FlowState st = make_state(s.chi, s.u0);
  const auto kind = static_cast<FlowKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(velocity_of(*s.chi, s.u0, kind, st.theta0, st.cot_theta0));
}
BENCHMARK(BM_Velocity)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Step(benchmark::State& state) {
  const Setup s = perturbed(16);
  const FlowState st = make_state(s.chi, s.u0);
  FlowConfig config;
  config.stepper = static_cast<Stepper>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(step(st, config));
}
BENCHMARK(BM_Step)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Record(benchmark::State& state) {
  const Setup s = perturbed(16);
  const FlowState st = make_state(s.chi, s.u0);
  for (auto _ : state) benchmark::DoNotOptimize(record(st, FlowKind::DHYM, s.u0, 0.0));
}
BENCHMARK(BM_Record)->Unit(benchmark::kMillisecond);

}  // namespace
