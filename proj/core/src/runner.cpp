#include "dhym/runner.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dhym/diagnostics.hpp"
#include "dhym/errors.hpp"
#include "dhym/oracles.hpp"
#include "dhym/snapshot.hpp"
#include "dhym/subsolution.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kImCyTolerance = 1e-6;
constexpr std::array<FlowKind, 3> kAllFlows{FlowKind::DHYM, FlowKind::LBMCF, FlowKind::TLPF};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string canonical_key(std::string_view key) {
  std::string k(trim(key));
  std::replace(k.begin(), k.end(), '-', '_');
  if (k == "grid") return "N";
  if (k == "tol") return "tol_stationary";
  return k;
}

[[noreturn]] void bad_value(const std::string& key, std::string_view value, std::string_view why) {
  throw ConfigError(key + ": " + std::string(why) + " (got '" + std::string(value) + "')");
}

template <class T>
T parse_number(const std::string& key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, "not a valid number");
  return out;
}

std::vector<FlowKind> parse_flows(const std::string& key, std::string_view value) {
  std::string lower(value);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "all") return {kAllFlows.begin(), kAllFlows.end()};
  std::vector<FlowKind> flows;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = std::min(value.find(',', start), value.size());
    const std::string_view item = trim(value.substr(start, comma - start));
    try {
      const FlowKind k = parse_flow_kind(item);
      if (std::find(flows.begin(), flows.end(), k) == flows.end()) flows.push_back(k);
    } catch (const ConfigError&) {
      bad_value(key, value, "unknown flow");
    }
    start = comma + 1;
  }
  return flows;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string flows_text(const std::vector<FlowKind>& flows) {
  std::string out;
  for (FlowKind k : flows) {
    if (!out.empty()) out += ",";
    out += to_string(k);
  }
  return out;
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

/// Ordered key: value lines, written on every exit path.
class Summary {
 public:
  explicit Summary(std::filesystem::path path) : path_(std::move(path)) {}
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, fmt(value)); }
  void add(const std::string& key, bool value) { add(key, std::string(value ? "true" : "false")); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  void write() const {
    std::ofstream out(path_);
    for (const auto& [k, v] : lines_) out << k << ": " << v << '\n';
    if (!out) throw Error("cannot write " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::vector<std::pair<std::string, std::string>> lines_;
};

double mean_removed_distance(const ScalarField& a, const ScalarField& b) {
  ScalarField d = a;
  d -= b;
  const double m = d.mean();
  double sup = 0.0;
  for (double x : d.values()) sup = std::max(sup, std::abs(x - m));
  return sup;
}

bool is_runtime_failure(RunStatus s) { return s != RunStatus::Converged && s != RunStatus::ReachedMaxTime; }

}  // namespace

void RunSpec::validate() const {
  if (n < 1 || n > kMaxComplexDim) throw ConfigError("n: must be 1, 2 or 3");
  if (points_per_axis < 8 || points_per_axis % 2 != 0) throw ConfigError("N: must be even and >= 8");
  if (scenario == ScenarioKind::HeatOracle && n != 1) throw ConfigError("n: heat-oracle requires n = 1");
  if (flows.empty()) throw ConfigError("flow: at least one flow is required");
  if (out_dir.empty()) throw ConfigError("out_dir: must not be empty");
  try {
    flow_config(FlowKind::DHYM).validate();
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '-', '_');
    throw ConfigError(msg);
  }
}

FlowConfig RunSpec::flow_config(FlowKind kind) const {
  FlowConfig c;
  c.kind = kind;
  c.stepper = stepper;
  c.dt_safety = dt_safety;
  c.tol_stationary = tol_stationary;
  c.max_time = max_time;
  c.snapshot_every = snapshot_every;
  return c;
}

std::vector<FlowKind> RunSpec::effective_flows() const {
  if (scenario == ScenarioKind::FlowComparison) return {kAllFlows.begin(), kAllFlows.end()};
  return flows;
}

void apply_setting(RunSpec& spec, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = canonical_key(raw_key);
  const std::string_view value = trim(raw_value);
  if (value.empty()) throw ConfigError(key + ": missing value");
  if (key == "scenario") {
    try {
      spec.scenario = parse_scenario(value);
    } catch (const ConfigError&) {
      bad_value(key, value, "unknown scenario");
    }
  } else if (key == "n") {
    spec.n = parse_number<int>(key, value);
  } else if (key == "N") {
    spec.points_per_axis = parse_number<int>(key, value);
  } else if (key == "flow") {
    spec.flows = parse_flows(key, value);
  } else if (key == "stepper") {
    try {
      spec.stepper = parse_stepper(value);
    } catch (const ConfigError&) {
      bad_value(key, value, "unknown stepper");
    }
  } else if (key == "dt_safety") {
    spec.dt_safety = parse_number<double>(key, value);
  } else if (key == "tol_stationary") {
    spec.tol_stationary = parse_number<double>(key, value);
  } else if (key == "max_time") {
    spec.max_time = parse_number<double>(key, value);
  } else if (key == "seed") {
    spec.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "out_dir") {
    spec.out_dir = std::filesystem::path(std::string(value));
  } else if (key == "snapshot_every") {
    spec.snapshot_every = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown key '" + std::string(trim(raw_key)) + "'");
  }
}

RunSpec parse_config(std::string_view text, RunSpec base) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + std::string(line) +
                        "'");
    }
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

RunSpec parse_config_file(const std::filesystem::path& path, RunSpec base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string format_config(const RunSpec& spec) {
  std::ostringstream os;
  os << "scenario = " << to_string(spec.scenario) << '\n'
     << "n = " << spec.n << '\n'
     << "N = " << spec.points_per_axis << '\n'
     << "flow = " << flows_text(spec.flows) << '\n'
     << "stepper = " << to_string(spec.stepper) << '\n'
     << "dt_safety = " << fmt(spec.dt_safety) << '\n'
     << "tol_stationary = " << fmt(spec.tol_stationary) << '\n'
     << "max_time = " << fmt(spec.max_time) << '\n'
     << "seed = " << spec.seed << '\n'
     << "out_dir = " << spec.out_dir.string() << '\n'
     << "snapshot_every = " << fmt(spec.snapshot_every) << '\n';
  return os.str();
}

std::vector<std::pair<std::string, std::string>> read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) continue;
    out.emplace_back(line.substr(0, colon), line.substr(colon + 2));
  }
  return out;
}

namespace {

int execute_impl(const RunSpec& spec, const Scenario* given, std::ostream& log) {
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    log << "error: cannot create " << spec.out_dir << ": " << ec.message() << '\n';
    return kExitRuntimeError;
  }

  Summary summary(spec.out_dir / "summary.txt");
  const std::vector<FlowKind> flows = spec.effective_flows();
  summary.add("scenario", std::string(to_string(spec.scenario)));
  summary.add("n", std::to_string(spec.n));
  summary.add("N", std::to_string(spec.points_per_axis));
  summary.add("flows", flows_text(flows));
  summary.add("stepper", std::string(to_string(spec.stepper)));
  summary.add("dt_safety", spec.dt_safety);
  summary.add("tol_stationary", spec.tol_stationary);
  summary.add("max_time", spec.max_time);
  summary.add("seed", std::to_string(spec.seed));

  int exit_code = kExitOk;
  auto finish = [&](int code) {
    summary.add("exit_code", std::to_string(code));
    try {
      summary.write();
    } catch (const Error& e) {
      log << "error: " << e.what() << '\n';
      return kExitRuntimeError;
    }
    return code;
  };

  try {
    const Scenario sc = given ? *given : build_scenario(spec.scenario, spec.n, spec.points_per_axis, spec.seed);
    summary.add("description", sc.description);

    const ComplexVolume volume = complex_volume(*sc.chi);
    summary.add("theta0", volume.theta0);
    summary.add("cot_theta0", volume.cot_theta0);
    summary.add("Z_re", volume.value.real());
    summary.add("Z_im", volume.value.imag());
    if (!(volume.theta0 > 0.0 && volume.theta0 < kPi)) {
      summary.add("error", std::string("theta0 is not in (0, pi); the class is not supercritical"));
      log << "error: theta0 = " << fmt(volume.theta0) << " is not in (0, pi)\n";
      return finish(kExitRuntimeError);
    }

    const ClosedForm chi_sub = sc.chi->shifted(sc.usub);
    const SubsolutionCertificate cert = certify(chi_sub, volume.theta0);
    summary.add("certificate.A0", cert.A0);
    summary.add("certificate.B0", cert.B0);
    summary.add("certificate.theta0", cert.theta0);
    summary.add("certificate.theta_min", cert.theta_min);
    summary.add("certificate.lambda_abs_max", cert.lambda_abs_max);
    summary.add("certificate.margin_A", cert.margin_A);
    summary.add("certificate.margin_B", cert.margin_B);
    summary.add("certificate.delta", cert.delta);
    summary.add("certificate.K", cert.K);
    summary.add("certificate.passes", cert.passes);
    summary.add("certified", cert.passes);
    if (!cert.passes) {
      const std::string warning = "initial data is not a certified subsolution (A0 >= theta0 or B0 >= pi)";
      summary.add("warning", warning);
      log << "warning: " << warning << "; running anyway\n";
    }

    const int n = spec.n;
    const double A1 = lambda_bound_A1(cert.B0, cert.theta_min, n);
    const double eta0 = harnack_eta0(cert.B0);
    const double c0 = 0.5 * std::sin(eta0);
    summary.add("lambda_bound_A1", A1);
    summary.add("harnack.eta0", eta0);
    summary.add("harnack.c0", c0);

    std::vector<std::pair<FlowKind, ScalarField>> finals;
    for (FlowKind kind : flows) {
      const std::string name = lowercase(to_string(kind));
      const std::string p = name + ".";
      std::filesystem::path csv =
          spec.out_dir / (flows.size() == 1 ? std::string("diagnostics.csv") : "diagnostics_" + name + ".csv");

      RunHooks hooks;
      hooks.usub = &sc.usub;
      std::size_t snap_index = 0;
      if (spec.snapshot_every > 0.0) {
        std::filesystem::create_directories(spec.out_dir / "snapshots");
        hooks.on_snapshot = [&](const FlowState& s) {
          std::ostringstream file;
          file << name << '_' << std::setw(6) << std::setfill('0') << snap_index++ << ".bin";
          write_snapshot(spec.out_dir / "snapshots" / file.str(), s.u);
        };
      }

      const auto t_start = std::chrono::steady_clock::now();
      const RunResult r = run(sc.chi, sc.u0, spec.flow_config(kind), hooks);
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
      write_csv(csv, r.series);
      log << name << ": " << to_string(r.status) << " at t = " << fmt(r.state.t) << " after " << r.steps
          << " steps (" << std::setprecision(3) << seconds << " s)\n";

      summary.add(p + "status", std::string(to_string(r.status)));
      if (!r.message.empty()) summary.add(p + "message", r.message);
      summary.add(p + "steps", r.steps);
      summary.add(p + "t_final", r.state.t);
      summary.add(p + "t_converged",
                  r.status == RunStatus::Converged ? fmt(r.state.t) : std::string("none"));

      const DiagnosticsRow& first = r.series.front();
      const DiagnosticsRow& last = r.series.back();
      summary.add(p + "final_theta_deviation",
                  std::max(std::abs(last.theta_max - volume.theta0), std::abs(last.theta_min - volume.theta0)));
      const DecayFit fit = fit_decay_rate(r.series, 0.5);
      summary.add(p + "decay.rate", fit.rate);
      summary.add(p + "decay.amplitude", fit.amplitude);
      summary.add(p + "decay.r_squared", fit.r_squared);
      summary.add(p + "decay.samples", fit.samples);

      const HarnackReport harnack = check_harnack(r.series, eta0, c0);
      summary.add(p + "harnack.C", harnack.empirical_C);
      summary.add(p + "harnack.C_half", harnack.empirical_C_half);
      const std::array<double, 5> s_values{0.0, 0.25, 0.5, 0.75, 1.0};
      const LowerBoundReport lower = check_top_wedge_lower_bound(*sc.chi, r.state.u, sc.usub, c0, s_values);
      summary.add(p + "harnack.lower_bound_margin", lower.margin);
      summary.add(p + "harnack.lower_bound_pass", lower.pass);

      const BoundednessReport bounded = check_boundedness(r.series);
      summary.add(p + "M0", bounded.M0);
      summary.add(p + "M1", bounded.M1);
      summary.add(p + "M2", bounded.M2);

      bool checks_ok = true;
      auto assert_check = [&](const std::string& label, const CheckReport& c) {
        summary.add(p + "check." + label, std::string(c.pass ? "pass" : "fail"));
        if (!c.pass) {
          checks_ok = false;
          log << name << ": check " << label << " failed" << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
        }
      };
      assert_check("max_principle", check_max_principle(r.series));
      assert_check("theta_bounds", check_theta_bounds(r.series, first.theta_min, first.theta_max));
      assert_check("lambda_bound", check_lambda_min_bound(r.series, A1));
      if (kind == FlowKind::DHYM) {
        summary.add(p + "im_cy_drift", im_cy_drift(r.series));
        // Only RK4 conserves Im CY to roundoff; other steppers report the drift.
        if (spec.stepper == Stepper::RK4) assert_check("im_cy", check_im_cy(r.series, kImCyTolerance));
      }
      if (r.status == RunStatus::Converged) {
        CheckReport c;
        c.pass = bounded.pass;
        c.detail = bounded.detail;
        assert_check("boundedness", c);
      }

      if (!given && spec.scenario == ScenarioKind::HeatOracle && kind == FlowKind::DHYM) {
        const oracles::HeatFlowOracle oracle = oracles::heat_flow_oracle(kHeatOracleAmplitude, spec.points_per_axis);
        ScalarField err = r.state.u;
        err -= oracle.solution(r.state.t);
        summary.add("heat_oracle.sup_error", err.max_abs());
        summary.add("heat_oracle.expected_rate", oracle.decay_rate());
      }

      if (is_runtime_failure(r.status)) {
        exit_code = kExitRuntimeError;
      } else if (exit_code == kExitOk && (!checks_ok || r.status != RunStatus::Converged)) {
        exit_code = kExitCheckFailure;
      }
      finals.emplace_back(kind, r.state.u);
    }

    for (std::size_t i = 0; i < finals.size(); ++i) {
      for (std::size_t j = i + 1; j < finals.size(); ++j) {
        summary.add("compare." + lowercase(to_string(finals[i].first)) + "_" + lowercase(to_string(finals[j].first)),
                    mean_removed_distance(finals[i].second, finals[j].second));
      }
    }
  } catch (const Error& e) {
    summary.add("error", std::string(e.what()));
    log << "error: " << e.what() << '\n';
    return finish(kExitRuntimeError);
  }
  return finish(exit_code);
}

}  // namespace

int execute(const RunSpec& spec, std::ostream& log) { return execute_impl(spec, nullptr, log); }

int execute(const RunSpec& spec, const Scenario& scenario, std::ostream& log) {
  if (!scenario.chi || scenario.chi->domain().complex_dim() != spec.n ||
      scenario.chi->domain().points_per_axis() != spec.points_per_axis) {
    log << "error: scenario does not match n and N of the run settings\n";
    return kExitRuntimeError;
  }
  return execute_impl(spec, &scenario, log);
}

}  // namespace dhym
