#include "dhym/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "dhym/errors.hpp"
#include "dhym/oracles.hpp"

namespace dhym {

namespace {

constexpr std::array<std::pair<ScenarioKind, std::string_view>, 5> kNames = {{
    {ScenarioKind::Constant, "constant"},
    {ScenarioKind::PerturbedConstant, "perturbed-constant"},
    {ScenarioKind::RandomSubsolution, "random-subsolution"},
    {ScenarioKind::FlowComparison, "flow-comparison"},
    {ScenarioKind::HeatOracle, "heat-oracle"},
}};

ScalarField perturbation(const DomainPtr& d) {
  const int last = d->real_axes() - 1;
  std::array<TrigMode, 2> modes{};
  modes[0].wavenumbers[0] = 1;
  modes[0].cos_coeff = 0.005;
  modes[1].wavenumbers[0] = 3;
  modes[1].wavenumbers[static_cast<std::size_t>(last)] += 3;
  modes[1].cos_coeff = 0.001;
  return trig_polynomial(d, modes);
}

HermitianMatrix random_constant_part(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> spectrum(1.5, 3.0);
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = Complex(unit(rng), unit(rng));
  const Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(z).householderQ();
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = spectrum(rng);
  Eigen::MatrixXcd c = q * d.asDiagonal() * q.adjoint();
  c = 0.5 * (c + c.adjoint()).eval();
  return HermitianMatrix(c);
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

ScenarioKind parse_scenario(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(lower.begin(), lower.end(), '_', '-');
  for (const auto& [k, n] : kNames)
    if (n == lower) return k;
  throw ConfigError("scenario: unknown value '" + std::string(name) + "'");
}

Scenario build_scenario(ScenarioKind kind, int n, int points_per_axis, std::uint64_t seed) {
  Scenario s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::Constant: {
      const DomainPtr d = build_domain(n, points_per_axis);
      s.chi = std::make_shared<ClosedForm>(d, HermitianMatrix(2.0 * HermitianMatrix::Identity(n, n)));
      s.u0 = ScalarField(d);
      s.description = "chi = 2I, u0 = 0";
      break;
    }
    case ScenarioKind::PerturbedConstant:
    case ScenarioKind::FlowComparison: {
      const DomainPtr d = build_domain(n, points_per_axis);
      s.chi = std::make_shared<ClosedForm>(d, HermitianMatrix(2.0 * HermitianMatrix::Identity(n, n)));
      s.u0 = perturbation(d);
      s.description = "chi = 2I, u0 = 0.005 cos(2 pi x1) + 0.001 cos(2 pi (3 x1 + 3 y_n))";
      break;
    }
    case ScenarioKind::RandomSubsolution: {
      const DomainPtr d = build_domain(n, points_per_axis);
      std::mt19937_64 rng(seed);
      const HermitianMatrix c = random_constant_part(n, rng);
      const int kmax = std::min(2, points_per_axis / 2 - 1);
      ScalarField phi = oracles::random_band_limited(d, kmax, 4, 0.002, rng());
      s.chi = std::make_shared<ClosedForm>(c, std::move(phi));
      s.u0 = ScalarField(d);
      s.description = "chi = C + dd^c phi, C seeded with eigenvalues in [1.5, 3], u0 = 0";
      break;
    }
    case ScenarioKind::HeatOracle: {
      if (n != 1) throw InvalidArgument("heat-oracle scenario requires n = 1");
      const oracles::HeatFlowOracle oracle = oracles::heat_flow_oracle(kHeatOracleAmplitude, points_per_axis);
      s.chi = std::make_shared<ClosedForm>(oracle.chi());
      s.u0 = ScalarField(s.chi->domain_ptr());
      s.description = "n = 1, chi = 1 + 0.5 cos(2 pi x1), u0 = 0";
      break;
    }
  }
  s.usub = s.u0;
  return s;
}

}  // namespace dhym
