#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dhym/errors.hpp"
#include "dhym/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dHYM flow simulator on flat complex tori"};
  app.set_version_flag("--version", "dhym 0.1.0");

  std::optional<std::string> config;
  // Flags are collected as raw strings and applied after the config file, so they win.
  std::vector<std::pair<std::string, std::optional<std::string>>> flags = {
      {"scenario", {}}, {"n", {}},          {"N", {}},        {"flow", {}},    {"stepper", {}},        {"dt_safety", {}},
      {"tol", {}},      {"max_time", {}},   {"seed", {}},     {"out_dir", {}}, {"snapshot_every", {}},
  };
  auto flag = [&](const std::string& key) -> std::optional<std::string>& {
    for (auto& [k, v] : flags)
      if (k == key) return v;
    throw std::logic_error("unregistered flag " + key);
  };

  app.add_option("--config", config, "key = value file; flags override its entries");
  app.add_option("--scenario", flag("scenario"),
                 "constant | perturbed-constant | random-subsolution | flow-comparison | heat-oracle");
  app.add_option("--n", flag("n"), "complex dimension (1, 2 or 3)");
  app.add_option("--grid", flag("N"), "grid points per real axis (even, >= 8)");
  app.add_option("--flow", flag("flow"), "dhym | lbmcf | tlpf, a comma list, or all");
  app.add_option("--stepper", flag("stepper"), "rk4 | euler | semi-implicit");
  app.add_option("--dt-safety", flag("dt_safety"), "fraction of the stable step, in (0, 1]");
  app.add_option("--tol", flag("tol"), "stop when sup|u_t| falls below this");
  app.add_option("--max-time", flag("max_time"), "final time if not converged");
  app.add_option("--seed", flag("seed"), "seed for random scenarios");
  app.add_option("--out-dir", flag("out_dir"), "directory for diagnostics.csv, summary.txt, snapshots/");
  app.add_option("--snapshot-every", flag("snapshot_every"), "snapshot interval in flow time (0 disables)");

  CLI11_PARSE(app, argc, argv);

  dhym::RunSpec spec;
  try {
    if (config) spec = dhym::parse_config_file(*config);
    for (const auto& [key, value] : flags)
      if (value) dhym::apply_setting(spec, key, *value);
    spec.validate();
  } catch (const dhym::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dhym::kExitRuntimeError;
  }
  return dhym::execute(spec, std::cout);
}
