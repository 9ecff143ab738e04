#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "dhym/angle_kernel.hpp"
#include "dhym/errors.hpp"
#include "dhym/oracles.hpp"
#include "dhym/subsolution.hpp"
#include "generators.hpp"

namespace dhym {
namespace {

constexpr double kPi = std::numbers::pi;

ClosedForm diagonal_form(int N, std::initializer_list<double> xs) {
  const int n = static_cast<int>(xs.size());
  HermitianMatrix c = HermitianMatrix::Zero(n, n);
  int i = 0;
  for (double x : xs) c(i, i) = x, ++i;
  return ClosedForm(build_domain(n, N), c);
}

TEST(A0, ConstantExamples) {
  EXPECT_NEAR(compute_A0(diagonal_form(8, {2.0, 2.0})), arccot(2.0), 1e-15);
  EXPECT_NEAR(arccot(2.0), 0.4636476, 1e-7);
  EXPECT_EQ(compute_A0(diagonal_form(8, {0.3})), 0.0);
  const double three = compute_A0(diagonal_form(8, {3.0, 1.0, -0.2}));
  EXPECT_NEAR(three, kPi / 4 + arccot(-0.2), 1e-15);
}

TEST(A0, ExhaustiveLoop) {
  testing::for_all(401, 500, [](testing::Gen& gen) {
    const int n = gen.integer(1, 3);
    RealVector l(n);
    for (int i = 0; i < n; ++i) l(i) = gen.uniform(-5.0, 5.0);
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        if (i != j) s += arccot(l(i));
      best = std::max(best, s);
    }
    EXPECT_NEAR(A0_of(view(l)), best, 1e-14);
  });
}

TEST(B0, ConstantExamples) {
  EXPECT_NEAR(compute_B0(diagonal_form(8, {2.0, 2.0})), 2 * arccot(2.0), 1e-15);
  EXPECT_NEAR(2 * arccot(2.0), 0.9272952, 1e-7);
  EXPECT_NEAR(compute_B0(diagonal_form(8, {0.0, 0.0})), kPi, 1e-15);
}

TEST(B0, GridMaximumUnderRefinement) {
  auto form = [](int N) {
    const DomainPtr d = build_domain(2, N);
    const ScalarField phi = oracles::random_band_limited(d, 2, 4, 0.02, 402);
    return ClosedForm(HermitianMatrix(2.0 * HermitianMatrix::Identity(2, 2)), phi);
  };
  const ClosedForm coarse = form(16);
  double direct = 0.0;
  for (std::size_t p = 0; p < coarse.domain().total_points(); ++p)
    direct = std::max(direct, theta_of(view(eigenvalues_descending(coarse.at(p)))));
  EXPECT_DOUBLE_EQ(compute_B0(coarse), direct);
  // Nested grids sample the same smooth field, so the maximum can only grow and the gap shrinks.
  const double mid = compute_B0(form(32));
  const double fine = compute_B0(form(64));
  EXPECT_GE(mid, direct - 1e-14);
  EXPECT_GE(fine, mid - 1e-14);
  EXPECT_LT(fine - mid, 0.5 * (mid - direct) + 1e-12);
  EXPECT_LE(compute_theta_min(coarse), direct);
}

TEST(Certify, ConstantExample) {
  const ClosedForm chi = diagonal_form(8, {2.0, 2.0});
  const double theta0 = std::atan2(4.0, 3.0);
  const SubsolutionCertificate c = certify(chi, theta0);
  EXPECT_TRUE(c.passes);
  EXPECT_NEAR(c.delta, std::min((kPi - theta0) / 4, arccot(2.0) / 8), 1e-15);
  EXPECT_NEAR(c.delta, 0.0579559, 1e-7);
  EXPECT_NEAR(c.K, 38.908, 1e-3);
  EXPECT_NEAR(c.K, 38.9071545, 1e-6);
  EXPECT_NEAR(c.margin_A, theta0 - arccot(2.0), 1e-15);
  EXPECT_NEAR(c.margin_B, kPi - theta0, 1e-15);
  EXPECT_NEAR(c.lambda_abs_max, 2.0, 1e-15);
}

TEST(Certify, FailsWhenA0ReachesTheta0) {
  const SubsolutionCertificate c = certify_from(2, arccot(0.1), 2 * arccot(0.1), 2 * arccot(0.1), 0.1, 0.5);
  EXPECT_FALSE(c.passes);
  EXPECT_LE(c.margin_A, 0.0);
}

TEST(Certify, OneDimension) {
  EXPECT_TRUE(certify_from(1, 0.0, 1.0, 0.5, 2.0, 0.8).passes);
  EXPECT_FALSE(certify_from(1, 0.0, kPi, 0.5, 2.0, 0.8).passes);
  EXPECT_THROW(certify_from(1, 0.0, 1.0, 0.5, 2.0, 0.0), InvalidArgument);
  const SubsolutionCertificate c = certify(diagonal_form(8, {0.5}), arccot(0.5));
  EXPECT_EQ(c.A0, 0.0);
  EXPECT_TRUE(c.passes);
}

TEST(SampleSDelta, StationaryTauIsZero) {
  const double theta0 = std::atan2(4.0, 3.0);
  const RealVector l = RealVector::Constant(2, 2.0);
  EXPECT_NEAR(1.0 / std::tan(theta0) - cot_theta(view(l)), 0.0, 1e-15);
}

TEST(SampleSDelta, CertifiedExampleHasNoViolations) {
  const double theta0 = std::atan2(4.0, 3.0);
  const SubsolutionCertificate c = certify(diagonal_form(8, {2.0, 2.0}), theta0);
  const RealVector l = RealVector::Constant(2, 2.0);
  const SamplingReport r = sample_S_delta(view(l), theta0, c.delta, c.K, 10000, 403);
  EXPECT_EQ(r.drawn, 10000u);
  EXPECT_GT(r.kept, 1000u);
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LE(r.max_radius, c.K);
}

TEST(SampleSDelta, InflatedDeltaViolates) {
  const double theta0 = std::atan2(4.0, 3.0);
  const SubsolutionCertificate c = certify(diagonal_form(8, {2.0, 2.0}), theta0);
  const RealVector l = RealVector::Constant(2, 2.0);
  const SamplingReport r = sample_S_delta(view(l), theta0, 100 * c.delta, c.K, 10000, 403);
  EXPECT_GT(r.violations, 0u);
  EXPECT_EQ(r.first_violation.size(), 3u);
}

TEST(SampleSDelta, Deterministic) {
  const RealVector l = RealVector::Constant(2, 2.0);
  const SamplingReport a = sample_S_delta(view(l), 0.9, 0.05, 30.0, 2000, 7);
  const SamplingReport b = sample_S_delta(view(l), 0.9, 0.05, 30.0, 2000, 7);
  EXPECT_EQ(a.kept, b.kept);
  EXPECT_EQ(a.max_radius, b.max_radius);
}

}  // namespace
}  // namespace dhym
