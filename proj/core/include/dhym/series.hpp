#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace dhym {

/// One recorded step of a run.
struct DiagnosticsRow {
  double t = 0.0;
  double max_ut = 0.0;
  double min_ut = 0.0;
  double osc_ut = 0.0;
  double theta_min = 0.0;
  double theta_max = 0.0;
  /// Signed smallest eigenvalue at the grid point where |lambda_n| is largest.
  double lambda_min_global = 0.0;
  double im_cy = 0.0;
  double re_cy = 0.0;
  double sup_u = 0.0;
  double inf_u_minus_usub = 0.0;
  double grad_norm_max = 0.0;
  double hess_norm_max = 0.0;
  double dt_used = 0.0;
};

inline constexpr std::array<std::string_view, 14> kDiagnosticsColumns = {
    "t",        "max_ut", "min_ut",          "osc_ut",        "theta_min",     "theta_max",
    "lambda_min_global", "im_cy", "re_cy",   "sup_u",         "inf_u_minus_usub", "grad_norm_max",
    "hess_norm_max", "dt_used"};

using DiagnosticsSeries = std::vector<DiagnosticsRow>;

}  // namespace dhym
