#pragma once

// Run orchestration: flat key = value configuration, scenario dispatch, and the
// diagnostics.csv / summary.txt / snapshot artifacts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dhym/flow.hpp"
#include "dhym/scenarios.hpp"

namespace dhym {

struct RunSpec {
  ScenarioKind scenario = ScenarioKind::Constant;
  int n = 2;
  int points_per_axis = 16;
  /// flow-comparison always runs all three, in this order.
  std::vector<FlowKind> flows{FlowKind::DHYM};
  Stepper stepper = Stepper::RK4;
  double dt_safety = 1.0;
  double tol_stationary = 1e-9;
  double max_time = 30.0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "dhym_out";
  /// 0 disables snapshots.
  double snapshot_every = 0.0;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  FlowConfig flow_config(FlowKind kind) const;
  /// Flows actually run for this spec.
  std::vector<FlowKind> effective_flows() const;
};

/// Keys: scenario, n, N (alias grid), flow (comma list or "all"), stepper,
/// dt_safety, tol_stationary (alias tol), max_time, seed, out_dir, snapshot_every.
/// Dashes in keys are accepted as underscores. Throws ConfigError naming the key.
void apply_setting(RunSpec& spec, std::string_view key, std::string_view value);

/// Parses `key = value` lines on top of `base`. '#' starts a comment.
RunSpec parse_config(std::string_view text, RunSpec base = {});
RunSpec parse_config_file(const std::filesystem::path& path, RunSpec base = {});

/// Config text that parse_config maps back to `spec`.
std::string format_config(const RunSpec& spec);

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailure = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs `spec` and writes its artifacts under out_dir. Returns 0 when every run
/// converged with all asserted checks passing, 1 when a check failed or a run
/// stopped at max_time, 2 on runtime errors. Progress and warnings go to `log`.
int execute(const RunSpec& spec, std::ostream& log);
/// Same, with caller-built initial data in place of the preset named by
/// spec.scenario (which is still used for labels). Its domain must match n and N.
int execute(const RunSpec& spec, const Scenario& scenario, std::ostream& log);

/// Reads summary.txt back into ordered (key, value) pairs.
std::vector<std::pair<std::string, std::string>> read_summary(const std::filesystem::path& path);

}  // namespace dhym
