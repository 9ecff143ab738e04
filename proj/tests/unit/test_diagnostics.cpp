#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "dhym/diagnostics.hpp"
#include "dhym/errors.hpp"
#include "dhym/scenarios.hpp"
#include "dhym/snapshot.hpp"
#include "generators.hpp"

namespace dhym {
namespace {

constexpr double kPi = std::numbers::pi;

RunResult short_run(ScenarioKind kind, FlowKind flow, double max_time, const RunHooks& hooks = {}) {
  const Scenario sc = build_scenario(kind, 2, 8);
  FlowConfig config;
  config.kind = flow;
  config.max_time = max_time;
  return run(sc.chi, sc.u0, config, hooks);
}

TEST(Record, ConstantScenarioIsQuiet) {
  const RunResult r = short_run(ScenarioKind::Constant, FlowKind::DHYM, 1.0);
  for (const DiagnosticsRow& row : r.series) {
    EXPECT_EQ(row.osc_ut, 0.0);
    EXPECT_EQ(row.im_cy, 0.0);
    EXPECT_EQ(row.sup_u, 0.0);
    EXPECT_NEAR(row.theta_min, 2 * std::atan(0.5), 1e-15);
    EXPECT_NEAR(row.lambda_min_global, 2.0, 1e-15);
  }
  EXPECT_EQ(im_cy_drift(r.series), 0.0);
  EXPECT_TRUE(check_max_principle(r.series).pass);
}

TEST(Record, FirstRowMatchesInitialData) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  const RunResult r = short_run(ScenarioKind::PerturbedConstant, FlowKind::DHYM, 0.001);
  const DiagnosticsRow& first = r.series.front();
  EXPECT_EQ(first.t, 0.0);
  EXPECT_NEAR(first.im_cy, im_cy(sc.u0, *sc.chi), 1e-15);
  EXPECT_NEAR(first.sup_u, sc.u0.max(), 1e-15);
  EXPECT_EQ(first.inf_u_minus_usub, 0.0);
}

TEST(Record, RecomputableFromSnapshots) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "dhym_test_record";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  std::vector<std::pair<double, std::filesystem::path>> snaps;
  RunHooks hooks;
  hooks.on_snapshot = [&](const FlowState& s) {
    const auto path = dir / ("s" + std::to_string(snaps.size()) + ".bin");
    write_snapshot(path, s.u);
    snaps.emplace_back(s.t, path);
  };
  FlowConfig config;
  config.max_time = 0.02;
  config.snapshot_every = 0.005;
  const RunResult r = run(sc.chi, sc.u0, config, hooks);
  ASSERT_GE(snaps.size(), 3u);
  for (const auto& [t, path] : snaps) {
    const DiagnosticsRow* row = nullptr;
    for (const DiagnosticsRow& candidate : r.series)
      if (candidate.t == t) row = &candidate;
    ASSERT_NE(row, nullptr);
    const ScalarField u = read_snapshot(path, sc.chi->domain_ptr());
    const FlowState s = make_state(sc.chi, u, t, complex_volume(*sc.chi), kDefaultThetaGuard);
    const DiagnosticsRow again = record(s, FlowKind::DHYM, sc.usub, row->dt_used);
    EXPECT_NEAR(again.max_ut, row->max_ut, 1e-12);
    EXPECT_NEAR(again.min_ut, row->min_ut, 1e-12);
    EXPECT_NEAR(again.theta_min, row->theta_min, 1e-12);
    EXPECT_NEAR(again.theta_max, row->theta_max, 1e-12);
    EXPECT_NEAR(again.lambda_min_global, row->lambda_min_global, 1e-12);
    EXPECT_NEAR(again.im_cy, row->im_cy, 1e-12);
    EXPECT_NEAR(again.re_cy, row->re_cy, 1e-12);
    EXPECT_NEAR(again.grad_norm_max, row->grad_norm_max, 1e-12);
    EXPECT_NEAR(again.hess_norm_max, row->hess_norm_max, 1e-12);
    EXPECT_NEAR(again.inf_u_minus_usub, row->inf_u_minus_usub, 1e-12);
  }
  std::filesystem::remove_all(dir);
}

TEST(Record, UtExtremesMatchVelocity) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  const FlowState s = make_state(sc.chi, sc.u0);
  for (FlowKind k : {FlowKind::DHYM, FlowKind::LBMCF, FlowKind::TLPF}) {
    const ScalarField v = velocity(s, k);
    const DiagnosticsRow row = record(s, k, sc.usub, 0.0);
    EXPECT_NEAR(row.max_ut, v.max(), 1e-14) << to_string(k);
    EXPECT_NEAR(row.min_ut, v.min(), 1e-14) << to_string(k);
    EXPECT_NEAR(row.osc_ut, v.max() - v.min(), 1e-14) << to_string(k);
  }
}

TEST(Checks, PerturbedRunPasses) {
  for (FlowKind k : {FlowKind::DHYM, FlowKind::LBMCF, FlowKind::TLPF}) {
    const RunResult r = short_run(ScenarioKind::PerturbedConstant, k, 0.2);
    const DiagnosticsRow& first = r.series.front();
    EXPECT_TRUE(check_max_principle(r.series).pass) << to_string(k);
    EXPECT_TRUE(check_theta_bounds(r.series, first.theta_min, first.theta_max).pass) << to_string(k);
    EXPECT_TRUE(check_lambda_min_bound(r.series, lambda_bound_A1(first.theta_max, first.theta_min, 2)).pass);
  }
}

TEST(Checks, CorruptedSeriesFails) {
  RunResult r = short_run(ScenarioKind::PerturbedConstant, FlowKind::DHYM, 0.05);
  ASSERT_GT(r.series.size(), 5u);
  DiagnosticsSeries bad = r.series;
  bad[4].max_ut = bad[0].max_ut + 1e-3;
  const CheckReport c = check_max_principle(bad);
  EXPECT_FALSE(c.pass);
  EXPECT_GE(c.violations, 1u);
  EXPECT_LT(c.worst_margin, 0.0);

  bad = r.series;
  bad[3].theta_max = bad[0].theta_max + 1e-6;
  EXPECT_FALSE(check_theta_bounds(bad, bad[0].theta_min, r.series[0].theta_max).pass);

  bad = r.series;
  bad[2].lambda_min_global = -10.0;
  EXPECT_FALSE(check_lambda_min_bound(bad, 2.75).pass);

  bad = r.series;
  bad[2].im_cy += 1e-3;
  EXPECT_FALSE(check_im_cy(bad, 1e-6).pass);
}

TEST(LambdaBound, ConstantExample) {
  const double b0 = std::atan2(4.0, 3.0);
  EXPECT_NEAR(lambda_bound_A1(b0, b0, 2), 2.75, 1e-14);
  EXPECT_NEAR(lambda_bound_A1(1.0, 0.6, 1), std::abs(1 / std::tan(1.0)) + std::abs(1 / std::tan(0.6)), 1e-15);
}

TEST(DecayFit, SyntheticExponential) {
  DiagnosticsSeries s;
  for (int i = 0; i <= 100; ++i) {
    DiagnosticsRow row;
    row.t = 0.05 * i;
    row.osc_ut = 5.0 * std::exp(-2.0 * row.t);
    s.push_back(row);
  }
  const DecayFit f = fit_decay_rate(s, 1.0);
  EXPECT_NEAR(f.amplitude, 5.0, 1e-12);
  EXPECT_NEAR(f.rate, 2.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.samples, 101u);
  EXPECT_EQ(fit_decay_rate(s, 0.5).samples, 51u);
}

TEST(DecayFit, ConstantSeriesHasNoSamples) {
  const RunResult r = short_run(ScenarioKind::Constant, FlowKind::DHYM, 1.0);
  EXPECT_EQ(fit_decay_rate(r.series).samples, 0u);
}

TEST(Harnack, ConstantScenarioLowerBound) {
  const Scenario sc = build_scenario(ScenarioKind::Constant, 2, 8);
  const double b0 = std::atan2(4.0, 3.0);
  const double eta0 = harnack_eta0(b0);
  EXPECT_NEAR(eta0, b0 / 6 + 5 * kPi / 6, 1e-15);
  const double c0 = 0.5 * std::sin(eta0);
  const std::array<double, 3> s_values{0.0, 0.5, 1.0};
  const LowerBoundReport lb = check_top_wedge_lower_bound(*sc.chi, sc.u0, sc.usub, c0, s_values);
  EXPECT_TRUE(lb.pass);
  EXPECT_NEAR(lb.margin, 5.0 * std::sin(b0) - std::sin(eta0), 1e-13);
  EXPECT_NEAR(lb.margin, 3.6392708, 1e-7);
  const RunResult r = short_run(ScenarioKind::Constant, FlowKind::DHYM, 1.0);
  EXPECT_EQ(check_harnack(r.series, eta0, c0).empirical_C, 0.0);
}

TEST(Harnack, MidpointEqualsAveragedPotential) {
  const Scenario sc = build_scenario(ScenarioKind::PerturbedConstant, 2, 8);
  const ScalarField u = 0.5 * sc.u0;
  const double c0 = 0.1;
  const std::array<double, 1> half{0.5};
  const LowerBoundReport lb = check_top_wedge_lower_bound(*sc.chi, u, sc.usub, c0, half);
  ScalarField mid = 0.5 * u;
  mid.add_scaled(0.5, sc.usub);
  const HermitianMatrixField w = sc.chi->realize_with(mid);
  double direct = 1e300;
  for (std::size_t p = 0; p < w.size(); ++p)
    direct = std::min(direct, pointwise_top_wedge(w.at(p), sc.chi->domain().metric()).imag() - 2 * c0);
  EXPECT_NEAR(lb.margin, direct, 1e-14);
  EXPECT_EQ(lb.worst_s, 0.5);
}

TEST(Harnack, EmpiricalConstantIsStable) {
  const RunResult r = short_run(ScenarioKind::PerturbedConstant, FlowKind::DHYM, 0.3);
  const double eta0 = harnack_eta0(r.series.front().theta_max);
  const HarnackReport h = check_harnack(r.series, eta0, 0.5 * std::sin(eta0));
  EXPECT_TRUE(std::isfinite(h.empirical_C));
  EXPECT_GE(h.empirical_C, h.empirical_C_half);
  EXPECT_LT(h.empirical_C, 2 * h.empirical_C_half + 1e-12);
}

TEST(Boundedness, ConvergedRun) {
  const RunResult r = short_run(ScenarioKind::PerturbedConstant, FlowKind::DHYM, 0.3);
  const BoundednessReport b = check_boundedness(r.series);
  EXPECT_TRUE(b.pass) << b.detail;
  EXPECT_GT(b.M1, 0.0);
  EXPECT_GT(b.M2, 0.0);
  DiagnosticsSeries grown = r.series;
  grown.back().hess_norm_max = 10 * b.M2;
  EXPECT_FALSE(check_boundedness(grown).pass);
}

TEST(Csv, RoundTrip) {
  const RunResult r = short_run(ScenarioKind::PerturbedConstant, FlowKind::LBMCF, 0.01);
  std::stringstream buf;
  write_csv(buf, r.series);
  EXPECT_EQ(buf.str().rfind("t,max_ut,min_ut,osc_ut,", 0), 0u);
  const DiagnosticsSeries back = read_csv(buf);
  ASSERT_EQ(back.size(), r.series.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].t, r.series[i].t);
    EXPECT_EQ(back[i].im_cy, r.series[i].im_cy);
    EXPECT_EQ(back[i].hess_norm_max, r.series[i].hess_norm_max);
    EXPECT_EQ(back[i].dt_used, r.series[i].dt_used);
  }
}

TEST(Csv, RejectsMalformed) {
  std::istringstream bad_header("t,foo\n0,1\n");
  EXPECT_THROW(read_csv(bad_header), SnapshotFormatError);
  std::stringstream short_row;
  write_csv(short_row, DiagnosticsSeries{});
  short_row << "0,1,2\n";
  EXPECT_THROW(read_csv(short_row), SnapshotFormatError);
}

}  // namespace
}  // namespace dhym
