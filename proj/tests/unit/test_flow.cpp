#include <cmath>
#include <memory>
#include <numbers>

#include <gtest/gtest.h>

#include "dhym/errors.hpp"
#include "dhym/flow.hpp"
#include "dhym/oracles.hpp"
#include "dhym/scenarios.hpp"
#include "generators.hpp"

namespace dhym {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr FlowKind kAllFlows[] = {FlowKind::DHYM, FlowKind::LBMCF, FlowKind::TLPF};

std::shared_ptr<const ClosedForm> constant_chi(int n, int N, double s = 2.0) {
  return std::make_shared<ClosedForm>(build_domain(n, N), HermitianMatrix(s * HermitianMatrix::Identity(n, n)));
}

TEST(Names, RoundTrip) {
  for (FlowKind k : kAllFlows) EXPECT_EQ(parse_flow_kind(to_string(k)), k);
  EXPECT_EQ(parse_flow_kind("lbmcf"), FlowKind::LBMCF);
  EXPECT_EQ(parse_stepper("rk4"), Stepper::RK4);
  EXPECT_EQ(parse_stepper(to_string(Stepper::SemiImplicit)), Stepper::SemiImplicit);
  EXPECT_EQ(parse_stepper(to_string(Stepper::ExplicitEuler)), Stepper::ExplicitEuler);
  EXPECT_THROW(parse_flow_kind("ricci"), ConfigError);
  EXPECT_THROW(parse_stepper("leapfrog"), ConfigError);
}

TEST(FlowConfig, Validation) {
  FlowConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt_safety = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FlowConfig{};
  c.tol_stationary = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FlowConfig{};
  c.max_time = std::nan("");
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Velocity, StationaryPoint) {
  const FlowState s = make_state(constant_chi(2, 8), ScalarField(build_domain(2, 8)));
  EXPECT_NEAR(s.theta0, 2 * arccot(2.0), 1e-15);
  for (FlowKind k : kAllFlows) EXPECT_LT(velocity(s, k).max_abs(), 1e-15) << to_string(k);
}

TEST(Velocity, OneDimensionalIsLinear) {
  const DomainPtr d = build_domain(1, 16);
  const ScalarField phi = oracles::random_band_limited(d, 3, 3, 0.01, 301);
  const ScalarField u = oracles::random_band_limited(d, 3, 3, 0.01, 302);
  auto chi = std::make_shared<ClosedForm>(HermitianMatrix(1.5 * HermitianMatrix::Identity(1, 1)), phi);
  const FlowState s = make_state(chi, u);
  const ScalarField v = velocity(s, FlowKind::DHYM);
  const HermitianMatrixField w = chi->realize_with(u);
  for (std::size_t p = 0; p < v.size(); ++p) EXPECT_NEAR(v[p], w.real_plane(0, 0)[p] - s.cot_theta0, 1e-12);
}

TEST(Velocity, PointwiseKernelArithmetic) {
  HermitianMatrix c = HermitianMatrix::Zero(2, 2);
  c(0, 0) = 2.0;
  c(1, 1) = 1.0;
  const DomainPtr d = build_domain(2, 8);
  const ClosedForm chi(d, c);
  const ScalarField u(d);
  const ScalarField dhym = velocity_of(chi, u, FlowKind::DHYM, kPi / 4, 1.0);
  const ScalarField lbmcf = velocity_of(chi, u, FlowKind::LBMCF, kPi / 4, 1.0);
  const ScalarField tlpf = velocity_of(chi, u, FlowKind::TLPF, kPi / 4, 1.0);
  EXPECT_NEAR(dhym.max(), -2.0 / 3, 1e-15);
  EXPECT_NEAR(dhym.min(), -2.0 / 3, 1e-15);
  EXPECT_NEAR(lbmcf[0], kPi / 4 - std::atan(3.0), 1e-15);
  EXPECT_NEAR(lbmcf[0], -0.4636, 1e-4);
  EXPECT_NEAR(tlpf[0], std::tan(kPi / 4 - std::atan(3.0)), 1e-14);
}

TEST(Velocity, TlpfRange) {
  const ClosedForm chi(build_domain(2, 8), HermitianMatrix(2.0 * HermitianMatrix::Identity(2, 2)));
  const double theta = 2 * arccot(2.0);
  const double far = theta + kPi / 2;
  EXPECT_THROW(velocity_of(chi, ScalarField(chi.domain_ptr()), FlowKind::TLPF, far, 1.0 / std::tan(far)),
               TlpfRangeViolation);
}

TEST(Velocity, StateAndFreeFunctionAgree) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  const FlowState s = make_state(sc.chi, sc.u0);
  for (FlowKind k : kAllFlows) {
    ScalarField a = velocity(s, k);
    a -= velocity_of(*sc.chi, sc.u0, k, s.theta0, s.cot_theta0);
    EXPECT_LT(a.max_abs(), 1e-14) << to_string(k);
  }
}

TEST(StableDt, Scaling) {
  const FlowState coarse = make_state(constant_chi(2, 8), ScalarField(build_domain(2, 8)));
  const FlowState fine = make_state(constant_chi(2, 16), ScalarField(build_domain(2, 16)));
  EXPECT_NEAR(stable_dt(fine) / stable_dt(coarse), 0.25, 1e-14);
  EXPECT_NEAR(stable_dt(coarse, 0.5) / stable_dt(coarse, 1.0), 0.5, 1e-15);
}

TEST(StableDt, ExplicitEulerStaysBounded) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 16);
  FlowState s = make_state(sc.chi, sc.u0);
  FlowConfig config;
  config.stepper = Stepper::ExplicitEuler;
  const double v0 = velocity(s, FlowKind::DHYM).max_abs();
  double peak = v0;
  for (int i = 0; i < 1000; ++i) {
    s = step(s, config);
    if (i % 50 == 49) peak = std::max(peak, velocity(s, FlowKind::DHYM).max_abs());
  }
  EXPECT_LE(peak, v0 * (1 + 1e-12));
  EXPECT_LT(velocity(s, FlowKind::DHYM).max_abs(), v0);
}

TEST(Step, ZeroVelocityOnlyAdvancesTime) {
  const FlowState s = make_state(constant_chi(2, 8), ScalarField(build_domain(2, 8)));
  for (Stepper st : {Stepper::ExplicitEuler, Stepper::RK4, Stepper::SemiImplicit}) {
    FlowConfig config;
    config.stepper = st;
    const FlowState next = step(s, config, 0.01);
    EXPECT_DOUBLE_EQ(next.t, 0.01);
    EXPECT_EQ(next.u.max_abs(), 0.0);
  }
}

TEST(Step, Rk4ModeDecayIsFifthOrder) {
  // n = 1, chi = 1: u_t = u_{1 bar 1} = -pi^2 u on the first mode.
  const DomainPtr d = build_domain(1, 16);
  auto chi = std::make_shared<ClosedForm>(d, HermitianMatrix(HermitianMatrix::Identity(1, 1)));
  const double eps = 0.01;
  const ScalarField u0 = ScalarField::from_function(
      d, [eps](std::span<const double> x) { return eps * std::cos(2 * kPi * x[0]); });
  const FlowState s = make_state(chi, u0);
  FlowConfig config;
  std::vector<double> errors;
  for (double dt : {0.04, 0.02}) {
    const FlowState next = step(s, config, dt);
    ScalarField err = next.u;
    err.add_scaled(-std::exp(-kPi * kPi * dt), u0);
    errors.push_back(err.max_abs());
  }
  // One RK4 step leaves (pi^2 dt)^5 / 120 of the mode, about 8e-5 at dt = 0.04.
  EXPECT_LT(errors[0], 1e-4 * eps);
  EXPECT_NEAR(errors[0] / errors[1], 32.0, 3.0);
}

TEST(Step, SemiImplicitStableAtTenTimesExplicit) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 16);
  FlowState s = make_state(sc.chi, sc.u0);
  FlowConfig config;
  config.stepper = Stepper::SemiImplicit;
  const double v0 = velocity(s, FlowKind::DHYM).max_abs();
  for (int i = 0; i < 40; ++i) {
    // The step is re-derived from the current spectrum each time.
    const double expected = s.t + kSemiImplicitDtFactor * stable_dt(s);
    s = step(s, config);
    EXPECT_NEAR(s.t, expected, 1e-12);
  }
  EXPECT_LT(velocity(s, FlowKind::DHYM).max_abs(), v0);
}

TEST(Run, ConstantConvergesImmediately) {
  for (FlowKind k : kAllFlows) {
    FlowConfig config;
    config.kind = k;
    const RunResult r = run(constant_chi(2, 8), ScalarField(build_domain(2, 8)), config);
    EXPECT_EQ(r.status, RunStatus::Converged);
    EXPECT_EQ(r.steps, 0u);
    EXPECT_EQ(r.state.t, 0.0);
    ASSERT_EQ(r.series.size(), 1u);
  }
}

TEST(Run, NotSupercriticalThrowsBeforeStart) {
  EXPECT_THROW(run(constant_chi(2, 8, 0.0), ScalarField(build_domain(2, 8)), FlowConfig{}), NotSupercritical);
}

TEST(Run, HeatFlowDecayRate) {
  const oracles::HeatFlowOracle oracle = oracles::heat_flow_oracle(0.5, 16);
  auto chi = std::make_shared<ClosedForm>(oracle.chi());
  FlowConfig config;
  config.max_time = 3.0;
  const RunResult r = run(chi, ScalarField(chi->domain_ptr()), config);
  ASSERT_EQ(r.status, RunStatus::Converged);
  ScalarField err = r.state.u;
  err -= oracle.solution(r.state.t);
  EXPECT_LT(err.max_abs(), 1e-9);
  // osc(u_t) = 2 a e^{-pi^2 t}
  for (std::size_t i = 0; i < r.series.size(); i += 500) {
    const DiagnosticsRow& row = r.series[i];
    EXPECT_NEAR(row.osc_ut, 2 * 0.5 * std::exp(-kPi * kPi * row.t), 1e-9);
  }
}

TEST(Run, SnapshotHookCadence) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  FlowConfig config;
  config.max_time = 0.01;
  config.snapshot_every = 0.004;
  std::vector<double> times;
  RunHooks hooks;
  hooks.on_snapshot = [&](const FlowState& s) { times.push_back(s.t); };
  const RunResult r = run(sc.chi, sc.u0, config, hooks);
  EXPECT_EQ(r.status, RunStatus::ReachedMaxTime);
  ASSERT_GE(times.size(), 3u);
  EXPECT_EQ(times[0], 0.0);
  EXPECT_NEAR(r.state.t, 0.01, 1e-15);
}

TEST(Run, FlowsAgreeOnStationaryState) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  std::vector<ScalarField> finals;
  for (FlowKind k : kAllFlows) {
    FlowConfig config;
    config.kind = k;
    config.stepper = Stepper::SemiImplicit;
    config.tol_stationary = 1e-10;
    const RunResult r = run(sc.chi, sc.u0, config);
    ASSERT_EQ(r.status, RunStatus::Converged) << to_string(k);
    ScalarField u = r.state.u;
    u -= ScalarField::constant(u.domain_ptr(), u.mean());
    finals.push_back(std::move(u));
  }
  for (std::size_t i = 1; i < finals.size(); ++i) {
    ScalarField diff = finals[i];
    diff -= finals[0];
    EXPECT_LT(diff.max_abs(), 1e-6);
  }
}

TEST(MeanLinearization, ConstantDiagonal) {
  const FlowState s = make_state(constant_chi(2, 8), ScalarField(build_domain(2, 8)));
  const HermitianMatrix dhym = mean_linearization(s, FlowKind::DHYM);
  // F = csc^2(theta0) / (1 + 4) I with cot theta0 = 3/4.
  EXPECT_NEAR(dhym(0, 0).real(), (1 + 0.5625) / 5, 1e-13);
  const HermitianMatrix lbmcf = mean_linearization(s, FlowKind::LBMCF);
  EXPECT_NEAR(lbmcf(0, 0).real(), 0.2, 1e-13);
}

}  // namespace
}  // namespace dhym
