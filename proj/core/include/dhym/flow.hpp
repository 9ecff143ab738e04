#pragma once

// Time evolution of the potential u under
//   DHYM   u_t = cot theta(chi_u) - cot theta0
//   LBMCF  u_t = theta0 - theta(chi_u)
//   TLPF   u_t = tan(theta0 - theta(chi_u))

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "dhym/angle_kernel.hpp"
#include "dhym/functionals.hpp"
#include "dhym/lattice.hpp"
#include "dhym/series.hpp"

namespace dhym {

enum class FlowKind { DHYM, LBMCF, TLPF };
enum class Stepper { ExplicitEuler, RK4, SemiImplicit };

std::string_view to_string(FlowKind kind);
std::string_view to_string(Stepper stepper);
/// Case-insensitive; throws ConfigError on unknown names.
FlowKind parse_flow_kind(std::string_view name);
Stepper parse_stepper(std::string_view name);

/// The semi-implicit stepper runs at this multiple of stable_dt.
inline constexpr double kSemiImplicitDtFactor = 10.0;
/// TLPF needs |theta0 - theta| < pi/2 - kTlpfMargin everywhere.
inline constexpr double kTlpfMargin = 1e-6;

struct FlowConfig {
  FlowKind kind = FlowKind::DHYM;
  Stepper stepper = Stepper::RK4;
  double dt_safety = 1.0;
  double tol_stationary = 1e-9;
  double max_time = 30.0;
  /// 0 disables snapshots.
  double snapshot_every = 0.0;
  double theta_guard = kDefaultThetaGuard;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Per-point spectra of chi_u, stored plane by plane.
struct FieldSpectra {
  int n = 0;
  AlignedVector<double> lambda;  ///< n values per point, descending
  /// Empty when computed without theta; theta_at() then derives it from cot theta.
  AlignedVector<double> theta;
  AlignedVector<double> cot_theta;
  AlignedVector<double> csc2_theta;
  HermitianMatrixField w;  ///< realized chi_u
  HermitianMatrixField F;
  /// max over the grid of csc^2(theta) / (1 + min_i lambda_i^2), the largest eigenvalue of F.
  double lambda_f_max = 0.0;

  std::size_t size() const { return cot_theta.size(); }
  double theta_at(std::size_t point) const {
    return theta.empty() ? 0.5 * std::numbers::pi - std::atan(cot_theta[point]) : theta[point];
  }
  PointSpectrum at(std::size_t point) const;
  double lambda_at(std::size_t point, int i) const {
    return lambda[point * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
  }
};

/// Throws PhaseSingular if theta leaves (guard, pi - guard) anywhere. With
/// `with_theta` false the theta array is left empty (the DHYM right-hand side and
/// F need only cot theta).
FieldSpectra compute_spectra(HermitianMatrixField w, double theta_guard, bool with_theta = true);

struct FlowState {
  std::shared_ptr<const ClosedForm> chi;
  ScalarField u;
  double t = 0.0;
  double theta0 = 0.0;
  double cot_theta0 = 0.0;
  double theta_guard = kDefaultThetaGuard;
  FieldSpectra spectra;
  /// Fourier coefficients of u, kept for diagnostics that differentiate u.
  std::shared_ptr<const Spectrum> u_hat;
};

/// Computes theta0 (NotSupercritical unless it lies in (0, pi)) and the spectra of chi_{u0}.
FlowState make_state(std::shared_ptr<const ClosedForm> chi, ScalarField u0,
                     double theta_guard = kDefaultThetaGuard);
/// Same, reusing an already computed theta0.
FlowState make_state(std::shared_ptr<const ClosedForm> chi, ScalarField u, double t, const ComplexVolume& volume,
                     double theta_guard);

/// Pointwise right-hand side. TLPF throws TlpfRangeViolation when |theta0 - theta|
/// comes within kTlpfMargin of pi/2.
ScalarField velocity(const FlowState& state, FlowKind kind);

/// Right-hand side for an arbitrary u, without building full spectra.
ScalarField velocity_of(const ClosedForm& chi, const ScalarField& u, FlowKind kind, double theta0,
                        double cot_theta0, double theta_guard = kDefaultThetaGuard);

/// dt_safety / (Lambda_F * kappa_max): Lambda_F is the largest eigenvalue of F over
/// the grid and kappa_max = sum over real axes of (pi N)^2 g^{jj}.
double stable_dt(const FlowState& state, double dt_safety = 1.0);

/// Per-point weight matrix of the linearized right-hand side for `kind`.
HermitianMatrix mean_linearization(const FlowState& state, FlowKind kind);

/// One step of size dt (dt <= 0 picks stable_dt, times kSemiImplicitDtFactor for the
/// semi-implicit stepper). Throws PhaseSingular, TlpfRangeViolation or NonFinite.
FlowState step(const FlowState& state, const FlowConfig& config, double dt = 0.0);

enum class RunStatus { Converged, ReachedMaxTime, PhaseSingular, TlpfRangeViolation, NonFinite };
std::string_view to_string(RunStatus status);

struct RunHooks {
  /// Reference potential for inf(u - usub); defaults to u0.
  const ScalarField* usub = nullptr;
  /// Called at t = 0 and every snapshot_every time units.
  std::function<void(const FlowState&)> on_snapshot;
};

struct RunResult {
  FlowState state;
  DiagnosticsSeries series;
  RunStatus status = RunStatus::ReachedMaxTime;
  std::string message;
  std::size_t steps = 0;
};

/// Integrates until sup|u_t| < tol_stationary or t reaches max_time, recording one
/// diagnostics row per accepted step. Failures inside the loop end the run with a
/// status and the partial series; NotSupercritical is thrown before it starts.
RunResult run(std::shared_ptr<const ClosedForm> chi, ScalarField u0, const FlowConfig& config,
              const RunHooks& hooks = {});

}  // namespace dhym
