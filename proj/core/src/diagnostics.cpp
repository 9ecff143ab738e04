#include "dhym/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;

std::array<double*, 14> fields(DiagnosticsRow& r) {
  return {&r.t,     &r.max_ut, &r.min_ut, &r.osc_ut, &r.theta_min,        &r.theta_max,     &r.lambda_min_global,
          &r.im_cy, &r.re_cy,  &r.sup_u,  &r.inf_u_minus_usub, &r.grad_norm_max, &r.hess_norm_max, &r.dt_used};
}

std::array<double, 14> values(const DiagnosticsRow& r) {
  return {r.t,     r.max_ut, r.min_ut, r.osc_ut, r.theta_min,        r.theta_max,     r.lambda_min_global,
          r.im_cy, r.re_cy,  r.sup_u,  r.inf_u_minus_usub, r.grad_norm_max, r.hess_norm_max, r.dt_used};
}

void note(CheckReport& report, double margin, const std::string& what) {
  if (margin < report.worst_margin) report.worst_margin = margin;
  if (margin < 0.0) {
    if (report.violations == 0) report.detail = what;
    ++report.violations;
    report.pass = false;
  }
}

std::string at_time(double t) {
  std::ostringstream s;
  s << "t = " << t;
  return s.str();
}

}  // namespace

DiagnosticsRow record(const FlowState& state, FlowKind kind, const ScalarField& usub, double dt_used) {
  const auto& s = state.spectra;
  const GridDomain& d = state.u.domain();
  const int n = d.complex_dim();
  DiagnosticsRow row;
  row.t = state.t;
  row.dt_used = dt_used;

  // Every right-hand side is monotone in theta, and theta is decreasing in cot theta,
  // so the velocity extremes sit at the theta extremes.
  if (s.theta.empty()) {
    const auto [cmin, cmax] = std::minmax_element(s.cot_theta.begin(), s.cot_theta.end());
    row.theta_min = 0.5 * kPi - std::atan(*cmax);
    row.theta_max = 0.5 * kPi - std::atan(*cmin);
  } else {
    const auto [tmin, tmax] = std::minmax_element(s.theta.begin(), s.theta.end());
    row.theta_min = *tmin;
    row.theta_max = *tmax;
  }
  switch (kind) {
    case FlowKind::DHYM: {
      const auto [cmin, cmax] = std::minmax_element(s.cot_theta.begin(), s.cot_theta.end());
      row.max_ut = *cmax - state.cot_theta0;
      row.min_ut = *cmin - state.cot_theta0;
      break;
    }
    case FlowKind::LBMCF:
      row.max_ut = state.theta0 - row.theta_min;
      row.min_ut = state.theta0 - row.theta_max;
      break;
    case FlowKind::TLPF:
      row.max_ut = std::tan(state.theta0 - row.theta_min);
      row.min_ut = std::tan(state.theta0 - row.theta_max);
      break;
  }
  row.osc_ut = row.max_ut - row.min_ut;

  double worst = 0.0;
  for (std::size_t p = 0; p < s.size(); ++p) {
    const double l = s.lambda_at(p, n - 1);
    if (p == 0 || std::abs(l) > std::abs(worst)) worst = l;
  }
  row.lambda_min_global = worst;

  const Complex cy = calabi_yau(state.u, s.w, *state.chi);
  row.im_cy = cy.imag();
  row.re_cy = cy.real();

  row.sup_u = state.u.max();
  if (!usub.domain().compatible_with(d)) throw InvalidArgument("record: usub lives on a different domain");
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < state.u.size(); ++p) gap = std::min(gap, state.u[p] - usub[p]);
  row.inf_u_minus_usub = gap;
  row.grad_norm_max = std::sqrt(
      (state.u_hat ? holomorphic_gradient_norm(*state.u_hat) : holomorphic_gradient_norm(state.u)).max());

  const HermitianMatrixField& chi = state.chi->realized();
  const bool identity = d.metric_is_identity();
  const HermitianMatrix& ginv = d.metric_inverse();
  double hess = 0.0;
  if (identity) {
    // |H|^2 = sum over i <= j of the plane magnitudes, off-diagonal planes twice.
    struct Plane {
      std::span<const double> wr, cr, wi, ci;
      double weight;
    };
    std::vector<Plane> planes;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        planes.push_back({s.w.real_plane(i, j), chi.real_plane(i, j), s.w.imag_plane(i, j), chi.imag_plane(i, j),
                          i == j ? 1.0 : 2.0});
      }
    }
    for (std::size_t p = 0; p < s.size(); ++p) {
      double sq = 0.0;
      for (const Plane& pl : planes) {
        const double re = pl.wr[p] - pl.cr[p];
        const double im = pl.wi[p] - pl.ci[p];
        sq += pl.weight * (re * re + im * im);
      }
      hess = std::max(hess, sq);
    }
  } else {
    for (std::size_t p = 0; p < s.size(); ++p) {
      const HermitianMatrix h = s.w.at(p) - chi.at(p);
      const HermitianMatrix a = ginv * h;
      hess = std::max(hess, (a * a).trace().real());
    }
  }
  row.hess_norm_max = std::sqrt(hess);

  for (double x : values(row)) {
    if (!std::isfinite(x)) throw NonFinite("non-finite diagnostics at t = " + std::to_string(state.t));
  }
  return row;
}

void write_csv(std::ostream& out, const DiagnosticsSeries& series) {
  for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) {
    if (c) out << ',';
    out << kDiagnosticsColumns[c];
  }
  out << '\n';
  char buf[40];
  for (const DiagnosticsRow& r : series) {
    const auto v = values(r);
    for (std::size_t c = 0; c < v.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", v[c]);
      if (c) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const DiagnosticsSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_csv(out, series);
  if (!out) throw Error("write failed: " + path.string());
}

DiagnosticsSeries read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SnapshotFormatError("empty diagnostics CSV");
  std::string expected;
  for (std::size_t c = 0; c < kDiagnosticsColumns.size(); ++c) {
    if (c) expected += ',';
    expected += kDiagnosticsColumns[c];
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw SnapshotFormatError("unexpected diagnostics header: " + line);
  DiagnosticsSeries series;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    DiagnosticsRow row;
    auto slots = fields(row);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < slots.size(); ++c) {
      const std::size_t end = line.find(',', pos);
      const bool last = c + 1 == slots.size();
      if ((end == std::string::npos) != last) {
        throw SnapshotFormatError("wrong column count on line " + std::to_string(line_no));
      }
      const std::string cell = line.substr(pos, last ? std::string::npos : end - pos);
      char* stop = nullptr;
      *slots[c] = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || stop != cell.c_str() + cell.size()) {
        throw SnapshotFormatError("bad number '" + cell + "' on line " + std::to_string(line_no));
      }
      pos = end + 1;
    }
    series.push_back(row);
  }
  return series;
}

DiagnosticsSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

CheckReport check_max_principle(const DiagnosticsSeries& series) {
  CheckReport report;
  if (series.empty()) return report;
  const DiagnosticsRow& first = series.front();
  for (std::size_t k = 1; k < series.size(); ++k) {
    const DiagnosticsRow& r = series[k];
    const DiagnosticsRow& prev = series[k - 1];
    const double tol = 1e-9 * (1.0 + r.t);
    note(report, first.max_ut + tol - r.max_ut, "max u_t above its initial value at " + at_time(r.t));
    note(report, r.min_ut - (first.min_ut - tol), "min u_t below its initial value at " + at_time(r.t));
    note(report, prev.max_ut + tol - r.max_ut, "max u_t increased at " + at_time(r.t));
    note(report, r.min_ut - (prev.min_ut - tol), "min u_t decreased at " + at_time(r.t));
  }
  return report;
}

CheckReport check_theta_bounds(const DiagnosticsSeries& series, double theta_min_init, double B0) {
  CheckReport report;
  for (const DiagnosticsRow& r : series) {
    note(report, r.theta_min - (theta_min_init - 1e-8), "theta below its initial minimum at " + at_time(r.t));
    note(report, B0 + 1e-8 - r.theta_max, "theta above B0 at " + at_time(r.t));
  }
  return report;
}

double lambda_bound_A1(double B0, double theta_min_init, int n) {
  return std::abs(1.0 / std::tan(B0)) + std::abs(1.0 / std::tan(theta_min_init / n));
}

CheckReport check_lambda_min_bound(const DiagnosticsSeries& series, double A1) {
  CheckReport report;
  for (const DiagnosticsRow& r : series) {
    note(report, A1 + 1e-8 - std::abs(r.lambda_min_global), "|lambda_min| above A1 at " + at_time(r.t));
  }
  return report;
}

double im_cy_drift(const DiagnosticsSeries& series) {
  if (series.empty()) return 0.0;
  const double ref = series.front().im_cy;
  double drift = 0.0;
  for (const DiagnosticsRow& r : series) drift = std::max(drift, std::abs(r.im_cy - ref) / (1.0 + std::abs(ref)));
  return drift;
}

CheckReport check_im_cy(const DiagnosticsSeries& series, double tol) {
  CheckReport report;
  if (series.empty()) return report;
  const double ref = series.front().im_cy;
  for (const DiagnosticsRow& r : series) {
    note(report, tol - std::abs(r.im_cy - ref) / (1.0 + std::abs(ref)), "Im CY drift above tolerance at " + at_time(r.t));
  }
  return report;
}

DecayFit fit_decay_rate(const DiagnosticsSeries& series, double window) {
  if (!(window > 0.0 && window <= 1.0)) throw InvalidArgument("window must lie in (0, 1]");
  DecayFit fit;
  if (series.empty()) return fit;
  const double t_end = series.back().t;
  const double t_start = t_end - window * (t_end - series.front().t);
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  std::size_t m = 0;
  for (const DiagnosticsRow& r : series) {
    if (r.t < t_start || !(r.osc_ut > 0.0)) continue;
    const double y = std::log(r.osc_ut);
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
    syy += y * y;
    ++m;
  }
  fit.samples = m;
  if (m < 2) return fit;
  const double md = static_cast<double>(m);
  const double ctt = stt - st * st / md;
  const double cty = sty - st * sy / md;
  const double cyy = syy - sy * sy / md;
  if (ctt <= 0.0) return fit;
  const double slope = cty / ctt;
  fit.rate = -slope;
  fit.amplitude = std::exp((sy - slope * st) / md);
  // Squared correlation; rounding can push a perfect fit a hair past 1.
  fit.r_squared = cyy > 0.0 ? std::min(1.0, (cty * cty) / (ctt * cyy)) : 1.0;
  return fit;
}

double harnack_eta0(double B0) { return B0 / 6.0 + 5.0 * kPi / 6.0; }

HarnackReport check_harnack(const DiagnosticsSeries& series, double eta0, double c0) {
  HarnackReport report;
  report.eta0 = eta0;
  report.c0 = c0;
  const std::size_t half = (series.size() + 1) / 2;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const DiagnosticsRow& r = series[k];
    const double denom = 1.0 - r.inf_u_minus_usub;
    const double c = denom > 0.0 ? std::max(0.0, r.sup_u / denom) : std::numeric_limits<double>::infinity();
    report.empirical_C = std::max(report.empirical_C, c);
    if (k < half) report.empirical_C_half = std::max(report.empirical_C_half, c);
  }
  return report;
}

LowerBoundReport check_top_wedge_lower_bound(const ClosedForm& chi, const ScalarField& u, const ScalarField& usub,
                                             double c0, std::span<const double> s_values) {
  LowerBoundReport report;
  report.margin = std::numeric_limits<double>::infinity();
  const HermitianMatrix& g = chi.domain().metric();
  for (double s : s_values) {
    ScalarField mix = s * u;
    mix.add_scaled(1.0 - s, usub);
    const HermitianMatrixField w = chi.realize_with(mix);
    for (std::size_t p = 0; p < w.size(); ++p) {
      const double m = pointwise_top_wedge(w.at(p), g).imag() - 2.0 * c0;
      if (m < report.margin) {
        report.margin = m;
        report.worst_s = s;
      }
    }
  }
  report.pass = report.margin >= 0.0;
  return report;
}

BoundednessReport check_boundedness(const DiagnosticsSeries& series) {
  BoundednessReport report;
  if (series.empty()) return report;
  const std::size_t split = series.size() - std::max<std::size_t>(1, series.size() / 4);
  std::array<double, 3> early{0.0, 0.0, 0.0};
  std::array<double, 3> late{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const DiagnosticsRow& r = series[k];
    const std::array<double, 3> v{std::abs(r.sup_u), r.grad_norm_max, r.hess_norm_max};
    auto& bucket = (k < split || series.size() == 1) ? early : late;
    for (std::size_t i = 0; i < 3; ++i) bucket[i] = std::max(bucket[i], v[i]);
  }
  report.M0 = std::max(early[0], late[0]);
  report.M1 = std::max(early[1], late[1]);
  report.M2 = std::max(early[2], late[2]);
  static constexpr std::array<const char*, 3> names{"M0", "M1", "M2"};
  for (std::size_t i = 0; i < 3; ++i) {
    if (late[i] > 1.01 * early[i] + 1e-12) {
      report.pass = false;
      if (report.detail.empty()) report.detail = std::string(names[i]) + " grew in the final quarter of the run";
    }
  }
  return report;
}

}  // namespace dhym
