#include "dhym/subsolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dhym/angle_kernel.hpp"
#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;

struct GridPhaseStats {
  double A0 = -std::numeric_limits<double>::infinity();
  double B0 = -std::numeric_limits<double>::infinity();
  double theta_min = std::numeric_limits<double>::infinity();
  double lambda_abs_max = 0.0;
};

GridPhaseStats grid_stats(const ClosedForm& chi_u) {
  GridPhaseStats s;
  const HermitianMatrix& g = chi_u.domain().metric();
  const std::size_t points = chi_u.domain().total_points();
  for (std::size_t p = 0; p < points; ++p) {
    const RealVector lambda = eigenvalues_descending(chi_u.at(p), g);
    const double theta = theta_of(view(lambda));
    s.A0 = std::max(s.A0, A0_of(view(lambda)));
    s.B0 = std::max(s.B0, theta);
    s.theta_min = std::min(s.theta_min, theta);
    s.lambda_abs_max = std::max(s.lambda_abs_max, lambda.cwiseAbs().maxCoeff());
  }
  return s;
}

double cot(double x) { return std::cos(x) / std::sin(x); }

}  // namespace

double A0_of(std::span<const double> lambda) {
  double best = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (i != j) sum += arccot(lambda[i]);
    }
    if (j == 0 || sum > best) best = sum;
  }
  return best;
}

double compute_A0(const ClosedForm& chi_u) { return grid_stats(chi_u).A0; }
double compute_B0(const ClosedForm& chi_u) { return grid_stats(chi_u).B0; }
double compute_theta_min(const ClosedForm& chi_u) { return grid_stats(chi_u).theta_min; }

SubsolutionCertificate certify_from(int n, double A0, double B0, double theta_min, double lambda_abs_max,
                                    double theta0) {
  if (!(theta0 > 0.0 && theta0 < kPi)) throw InvalidArgument("theta0 must lie in (0, pi)");
  SubsolutionCertificate c;
  c.A0 = A0;
  c.B0 = B0;
  c.theta0 = theta0;
  c.theta_min = theta_min;
  c.lambda_abs_max = lambda_abs_max;
  c.margin_A = theta0 - A0;
  c.margin_B = kPi - B0;
  c.passes = A0 < theta0 && B0 < kPi;
  const double nd = static_cast<double>(n);
  c.delta = std::min((kPi - B0) / (2.0 * nd), (theta0 - A0) / (2.0 * (nd + 2.0)));
  // The cot term uses 2(n+1) while delta uses 2(n+2); both kept as stated.
  c.K = 2.0 * nd *
        (c.delta + lambda_abs_max + cot(theta0) - cot(0.5 * (kPi + B0)) + cot(nd * (theta0 - A0) / (2.0 * (nd + 1.0))));
  return c;
}

SubsolutionCertificate certify(const ClosedForm& chi_u, double theta0) {
  const GridPhaseStats s = grid_stats(chi_u);
  return certify_from(chi_u.domain().complex_dim(), s.A0, s.B0, s.theta_min, s.lambda_abs_max, theta0);
}

SamplingReport sample_S_delta(std::span<const double> lambda, double theta0, double delta, double K,
                              std::size_t count, std::uint64_t seed) {
  if (lambda.empty() || lambda.size() > static_cast<std::size_t>(kMaxComplexDim)) {
    throw InvalidArgument("lambda must have 1..3 entries");
  }
  if (!(delta > 0.0) || !(K > 0.0)) throw InvalidArgument("delta and K must be positive");
  const std::size_t n = lambda.size();
  const double cot0 = cot(theta0);
  const std::array<double, 3> scales{2.0 * K, 1.0, 0.1};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SamplingReport report;
  std::array<double, kMaxComplexDim> mu{};
  std::array<double, kMaxComplexDim> shifted{};
  for (std::size_t k = 0; k < count; ++k) {
    ++report.drawn;
    const double s = scales[k % scales.size()];
    for (std::size_t i = 0; i < n; ++i) {
      double x;
      do {
        x = -delta + s * unit(rng);
      } while (!(x > -delta));
      mu[i] = x;
      shifted[i] = lambda[i] + x;
    }
    const std::span<const double> lm(shifted.data(), n);
    const double theta = theta_of(lm);
    if (!(theta > kDefaultThetaGuard && theta < kPi - kDefaultThetaGuard)) {
      ++report.excluded_phase;
      continue;
    }
    const double tau = cot0 - cot_theta(lm);
    if (!(tau > -delta)) {
      ++report.excluded_tau;
      continue;
    }
    ++report.kept;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm2 += mu[i] * mu[i];
    const double radius = std::sqrt(norm2) + std::abs(tau);
    report.max_radius = std::max(report.max_radius, radius);
    if (radius > K) {
      if (report.violations == 0) {
        report.first_violation.assign(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(n));
        report.first_violation.push_back(tau);
      }
      ++report.violations;
    }
  }
  return report;
}

}  // namespace dhym
