#pragma once

// Code-defined initial data for the runner and the acceptance suite.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "dhym/functionals.hpp"

namespace dhym {

enum class ScenarioKind { Constant, PerturbedConstant, RandomSubsolution, FlowComparison, HeatOracle };

std::string_view to_string(ScenarioKind kind);
/// Throws ConfigError on unknown names.
ScenarioKind parse_scenario(std::string_view name);

/// Amplitude of the heat-oracle coefficient, chi_{1\bar 1} = 1 + a cos(2 pi x_1).
inline constexpr double kHeatOracleAmplitude = 0.5;

struct Scenario {
  ScenarioKind kind = ScenarioKind::Constant;
  std::shared_ptr<const ClosedForm> chi;
  ScalarField u0;
  /// Reference potential for certification and inf(u - usub).
  ScalarField usub;
  std::string description;
};

/// constant:            chi = 2I, u0 = 0.
/// perturbed-constant:  chi = 2I, u0 = 0.005 cos(2 pi x_1) + 0.001 cos(2 pi (3 x_1 + 3 y_n)).
/// flow-comparison:     same data as perturbed-constant.
/// random-subsolution:  chi = C + dd^c phi with C a seeded Hermitian matrix with
///                      eigenvalues in [1.5, 3] and phi small and band-limited; u0 = 0.
/// heat-oracle:         n = 1 (other n rejected), chi_{1\bar 1} = 1 + 0.5 cos(2 pi x_1), u0 = 0.
/// usub = u0 in every case. Throws InvalidArgument on a bad n or N.
Scenario build_scenario(ScenarioKind kind, int n, int points_per_axis, std::uint64_t seed = 0);

}  // namespace dhym
