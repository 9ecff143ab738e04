#pragma once

// Per-step invariant monitoring and the runtime checks built on it. Every check_*
// function is a pure function of a series, so it can be replayed from CSV.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dhym/flow.hpp"
#include "dhym/series.hpp"

namespace dhym {

/// Row for the current state. `usub` is the reference potential for
/// inf(u - usub). Throws NonFinite if any entry is not finite.
DiagnosticsRow record(const FlowState& state, FlowKind kind, const ScalarField& usub, double dt_used);

void write_csv(std::ostream& out, const DiagnosticsSeries& series);
void write_csv(const std::filesystem::path& path, const DiagnosticsSeries& series);
/// Throws SnapshotFormatError (reused for malformed text) on header or row errors.
DiagnosticsSeries read_csv(std::istream& in);
DiagnosticsSeries read_csv(const std::filesystem::path& path);

struct CheckReport {
  bool pass = true;
  std::size_t violations = 0;
  /// Smallest slack over all rows (negative on violation).
  double worst_margin = 0.0;
  std::string detail;
};

/// max_ut never exceeds its initial value (nor its previous value) and min_ut never
/// falls below, each within 1e-9 (1 + t).
CheckReport check_max_principle(const DiagnosticsSeries& series);

/// theta_min_init - 1e-8 <= theta <= B0 + 1e-8 on every row.
CheckReport check_theta_bounds(const DiagnosticsSeries& series, double theta_min_init, double B0);

/// A1 = |cot B0| + |cot(theta_min_init / n)|.
double lambda_bound_A1(double B0, double theta_min_init, int n);
/// |lambda_min_global| <= A1 + 1e-8 on every row.
CheckReport check_lambda_min_bound(const DiagnosticsSeries& series, double A1);

/// Largest |im_cy(t) - im_cy(0)| / (1 + |im_cy(0)|).
double im_cy_drift(const DiagnosticsSeries& series);
CheckReport check_im_cy(const DiagnosticsSeries& series, double tol);

struct DecayFit {
  double amplitude = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares fit log(osc_ut) = log(amplitude) - rate t over the trailing
/// `window` fraction (0, 1] of the rows with positive osc_ut.
DecayFit fit_decay_rate(const DiagnosticsSeries& series, double window = 0.5);

struct HarnackReport {
  /// Smallest C with sup u <= C (1 - inf(u - usub)) on every row (0 if sup u <= 0).
  double empirical_C = 0.0;
  /// Same constant over the first half of the rows.
  double empirical_C_half = 0.0;
  double eta0 = 0.0;
  double c0 = 0.0;
};

/// eta0 = B0/6 + 5 pi / 6, c0 = sin(eta0) / 2.
double harnack_eta0(double B0);
HarnackReport check_harnack(const DiagnosticsSeries& series, double eta0, double c0);

struct LowerBoundReport {
  bool pass = true;
  /// min over s and grid of Im det(g^{-1} w_s + i I) - 2 c0, w_s = chi + dd^c(s u + (1-s) usub).
  double margin = 0.0;
  double worst_s = 0.0;
};

LowerBoundReport check_top_wedge_lower_bound(const ClosedForm& chi, const ScalarField& u, const ScalarField& usub,
                                             double c0, std::span<const double> s_values);

struct BoundednessReport {
  double M0 = 0.0;  ///< sup |sup_u|
  double M1 = 0.0;  ///< sup grad_norm_max
  double M2 = 0.0;  ///< sup hess_norm_max
  /// Final-quarter maxima are within 1% of the maxima over the earlier rows.
  bool pass = true;
  std::string detail;
};

BoundednessReport check_boundedness(const DiagnosticsSeries& series);

}  // namespace dhym
