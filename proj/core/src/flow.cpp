#include "dhym/flow.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dhym/diagnostics.hpp"
#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Inverse of a Hermitian positive definite matrix of size <= 3 by cofactors.
HermitianMatrix small_inverse(const HermitianMatrix& m) {
  const auto n = m.rows();
  HermitianMatrix inv(n, n);
  if (n == 1) {
    inv(0, 0) = 1.0 / m(0, 0);
    return inv;
  }
  if (n == 2) {
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    inv(0, 0) = m(1, 1) / det;
    inv(0, 1) = -m(0, 1) / det;
    inv(1, 0) = -m(1, 0) / det;
    inv(1, 1) = m(0, 0) / det;
    return inv;
  }
  return m.inverse();
}

struct PhaseSample {
  double theta;
  double cot_theta;
};

// Phase of chi_u at one point, n <= 2 by the determinant and n = 3 by eigenvalues.
PhaseSample phase_at(const HermitianMatrix& w, const GridDomain& d, double guard) {
  const int n = d.complex_dim();
  if (n <= 2) {
    HermitianMatrix m = d.metric_is_identity() ? w : HermitianMatrix(d.metric_inverse() * w);
    Complex p;
    if (n == 1) {
      p = Complex(m(0, 0).real(), 1.0);
    } else {
      p = (m(0, 0) + Complex(0.0, 1.0)) * (m(1, 1) + Complex(0.0, 1.0)) - m(0, 1) * m(1, 0);
    }
    if (!(p.imag() > std::abs(p) * std::sin(guard))) {
      throw PhaseSingular("theta left (0, pi): prod(lambda + i) = (" + std::to_string(p.real()) + ", " +
                          std::to_string(p.imag()) + ")");
    }
    return {std::atan2(p.imag(), p.real()), p.real() / p.imag()};
  }
  const RealVector lambda = eigenvalues_descending(w, d.metric());
  const double theta = theta_of(view(lambda));
  if (!(theta > guard && theta < kPi - guard)) {
    throw PhaseSingular("theta = " + std::to_string(theta) + " outside the admissible range (0, pi)");
  }
  return {theta, cot_theta(view(lambda), guard)};
}

double tlpf_velocity(double theta0, double theta) {
  const double diff = theta0 - theta;
  if (!(std::abs(diff) < 0.5 * kPi - kTlpfMargin)) {
    throw TlpfRangeViolation("|theta0 - theta| = " + std::to_string(std::abs(diff)) + " reached pi/2");
  }
  return std::tan(diff);
}

FlowState advance(const FlowState& state, ScalarField u_new, double dt, FlowKind kind) {
  if (!u_new.all_finite()) throw NonFinite("non-finite values in u at t = " + std::to_string(state.t + dt));
  FlowState next;
  next.chi = state.chi;
  next.t = state.t + dt;
  next.theta0 = state.theta0;
  next.cot_theta0 = state.cot_theta0;
  next.theta_guard = state.theta_guard;
  auto u_hat = std::make_shared<const Spectrum>(u_new);
  next.spectra = compute_spectra(state.chi->realize_with(*u_hat), state.theta_guard, kind != FlowKind::DHYM);
  next.u_hat = std::move(u_hat);
  next.u = std::move(u_new);
  return next;
}

ScalarField semi_implicit_increment(const FlowState& state, const ScalarField& v, FlowKind kind, double dt) {
  const HermitianMatrix fbar = mean_linearization(state, kind);
  const int n = state.u.domain().complex_dim();
  const double pi2 = kPi * kPi;
  const Spectrum v_hat(v);
  return v_hat.apply([&](const Wavenumbers& k) {
    std::array<Complex, kMaxComplexDim> zeta{};
    for (int j = 0; j < n; ++j) zeta[static_cast<std::size_t>(j)] = Complex(k[2 * j], k[2 * j + 1]);
    Complex s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        s += fbar(j, i) * std::conj(zeta[static_cast<std::size_t>(i)]) * zeta[static_cast<std::size_t>(j)];
      }
    }
    const double sigma = pi2 * s.real();
    return dt / (1.0 + dt * sigma);
  });
}

}  // namespace

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::DHYM:
      return "dhym";
    case FlowKind::LBMCF:
      return "lbmcf";
    case FlowKind::TLPF:
      return "tlpf";
  }
  return "unknown";
}

std::string_view to_string(Stepper stepper) {
  switch (stepper) {
    case Stepper::ExplicitEuler:
      return "euler";
    case Stepper::RK4:
      return "rk4";
    case Stepper::SemiImplicit:
      return "semi-implicit";
  }
  return "unknown";
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Converged:
      return "converged";
    case RunStatus::ReachedMaxTime:
      return "max-time";
    case RunStatus::PhaseSingular:
      return "phase-singular";
    case RunStatus::TlpfRangeViolation:
      return "tlpf-range-violation";
    case RunStatus::NonFinite:
      return "non-finite";
  }
  return "unknown";
}

FlowKind parse_flow_kind(std::string_view name) {
  const std::string s = lower(name);
  if (s == "dhym") return FlowKind::DHYM;
  if (s == "lbmcf") return FlowKind::LBMCF;
  if (s == "tlpf") return FlowKind::TLPF;
  throw ConfigError("flow: unknown flow kind '" + std::string(name) + "' (expected dhym, lbmcf or tlpf)");
}

Stepper parse_stepper(std::string_view name) {
  const std::string s = lower(name);
  if (s == "euler" || s == "explicit-euler") return Stepper::ExplicitEuler;
  if (s == "rk4") return Stepper::RK4;
  if (s == "semi-implicit" || s == "semiimplicit") return Stepper::SemiImplicit;
  throw ConfigError("stepper: unknown stepper '" + std::string(name) + "' (expected euler, rk4 or semi-implicit)");
}

void FlowConfig::validate() const {
  if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw ConfigError("dt-safety must lie in (0, 1]");
  if (!(tol_stationary > 0.0 && std::isfinite(tol_stationary))) throw ConfigError("tol must be positive");
  if (!(max_time >= 0.0 && std::isfinite(max_time))) throw ConfigError("max-time must be finite and >= 0");
  if (!(snapshot_every >= 0.0 && std::isfinite(snapshot_every))) throw ConfigError("snapshot-every must be >= 0");
  if (!(theta_guard > 0.0 && theta_guard < 0.1)) throw ConfigError("theta-guard must lie in (0, 0.1)");
}

PointSpectrum FieldSpectra::at(std::size_t point) const {
  PointSpectrum s;
  s.lambda.resize(n);
  for (int i = 0; i < n; ++i) s.lambda(i) = lambda_at(point, i);
  s.theta = theta_at(point);
  s.cot_theta = cot_theta[point];
  s.csc2_theta = csc2_theta[point];
  s.F = F.at(point);
  return s;
}

FieldSpectra compute_spectra(HermitianMatrixField w, double theta_guard, bool with_theta) {
  const GridDomain& d = w.domain();
  const int n = d.complex_dim();
  const std::size_t points = d.total_points();
  const bool identity = d.metric_is_identity();
  const HermitianMatrix& g = d.metric();
  FieldSpectra s;
  s.n = n;
  s.lambda.resize(points * static_cast<std::size_t>(n));
  if (with_theta) s.theta.resize(points);
  s.cot_theta.resize(points);
  s.csc2_theta.resize(points);
  s.F = HermitianMatrixField::for_overwrite(w.domain_ptr());
  auto check_theta = [&](double theta) {
    if (!(theta > theta_guard && theta < kPi - theta_guard)) {
      throw PhaseSingular("theta = " + std::to_string(theta) + " outside the admissible range (0, pi)");
    }
  };
  double lambda_f = 0.0;
  const double sin2_guard = std::sin(theta_guard) * std::sin(theta_guard);
  if (identity && n == 2) {
    // Closed forms: lambda from the 2x2 characteristic polynomial, F from the
    // adjugate of w^2 + I.
    const auto w00 = w.real_plane(0, 0);
    const auto w11 = w.real_plane(1, 1);
    const auto w01r = w.real_plane(0, 1);
    const auto w01i = w.imag_plane(0, 1);
    const auto f00 = s.F.real_plane(0, 0);
    const auto f11 = s.F.real_plane(1, 1);
    const auto f01r = s.F.real_plane(0, 1);
    const auto f01i = s.F.imag_plane(0, 1);
    for (std::size_t p = 0; p < points; ++p) {
      const double a = w00[p];
      const double dd = w11[p];
      const double br = w01r[p];
      const double bi = w01i[p];
      const double b2 = br * br + bi * bi;
      const double mean = 0.5 * (a + dd);
      const double half_gap = 0.5 * (a - dd);
      const double radius = std::sqrt(half_gap * half_gap + b2);
      const double l1 = mean + radius;
      const double l2 = mean - radius;
      // prod(lambda + i) = (l1 l2 - 1) + i (l1 + l2); theta = arg of it on (0, pi).
      const double re_p = a * dd - b2 - 1.0;
      const double im_p = a + dd;
      if (!(im_p > 0.0 && im_p * im_p > sin2_guard * (re_p * re_p + im_p * im_p))) {
        check_theta(theta_of(std::array<double, 2>{l1, l2}));
        check_theta(std::atan2(im_p, re_p));
      }
      const double cot = re_p / im_p;
      const double csc2 = 1.0 + cot * cot;
      s.lambda[2 * p] = l1;
      s.lambda[2 * p + 1] = l2;
      if (with_theta) s.theta[p] = std::atan2(im_p, re_p);
      lambda_f = std::max(lambda_f, csc2 / (1.0 + std::min(l1 * l1, l2 * l2)));
      s.cot_theta[p] = cot;
      s.csc2_theta[p] = csc2;
      // q = w^2 + I = [[q00, q01], [conj(q01), q11]]
      const double q00 = a * a + b2 + 1.0;
      const double q11 = dd * dd + b2 + 1.0;
      const double q01r = br * (a + dd);
      const double q01i = bi * (a + dd);
      const double det = q00 * q11 - (q01r * q01r + q01i * q01i);
      const double scale = csc2 / det;
      f00[p] = scale * q11;
      f11[p] = scale * q00;
      f01r[p] = -scale * q01r;
      f01i[p] = -scale * q01i;
    }
    s.lambda_f_max = lambda_f;
    s.w = std::move(w);
    return s;
  }
  for (std::size_t p = 0; p < points; ++p) {
    const HermitianMatrix m = w.at(p);
    const RealVector lambda = eigenvalues_descending(m, g);
    const double theta = theta_of(view(lambda));
    check_theta(theta);
    const double cot = cot_theta(view(lambda), theta_guard);
    const double csc2 = 1.0 + cot * cot;
    for (int i = 0; i < n; ++i) s.lambda[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = lambda(i);
    if (with_theta) s.theta[p] = theta;
    s.cot_theta[p] = cot;
    s.csc2_theta[p] = csc2;
    double min_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) min_sq = std::min(min_sq, lambda(i) * lambda(i));
    lambda_f = std::max(lambda_f, csc2 / (1.0 + min_sq));
    if (identity) {
      HermitianMatrix q = m * m;
      q.diagonal().array() += 1.0;
      HermitianMatrix f = csc2 * small_inverse(q);
      s.F.set(p, 0.5 * (f + f.adjoint()));
    } else {
      s.F.set(p, linearization_matrix(m, g, theta, theta_guard));
    }
  }
  s.lambda_f_max = lambda_f;
  s.w = std::move(w);
  return s;
}

FlowState make_state(std::shared_ptr<const ClosedForm> chi, ScalarField u, double t, const ComplexVolume& volume,
                     double theta_guard) {
  if (!chi) throw InvalidArgument("null form");
  if (!u.domain().compatible_with(chi->domain())) throw InvalidArgument("u and chi live on different domains");
  if (!u.all_finite()) throw NonFinite("initial potential has non-finite values");
  FlowState s;
  s.theta0 = volume.theta0;
  s.cot_theta0 = volume.cot_theta0;
  s.theta_guard = theta_guard;
  s.t = t;
  auto u_hat = std::make_shared<const Spectrum>(u);
  s.spectra = compute_spectra(chi->realize_with(*u_hat), theta_guard);
  s.u_hat = std::move(u_hat);
  s.u = std::move(u);
  s.chi = std::move(chi);
  return s;
}

FlowState make_state(std::shared_ptr<const ClosedForm> chi, ScalarField u0, double theta_guard) {
  if (!chi) throw InvalidArgument("null form");
  const ComplexVolume volume = theta_zero(*chi);
  return make_state(std::move(chi), std::move(u0), 0.0, volume, theta_guard);
}

ScalarField velocity(const FlowState& state, FlowKind kind) {
  auto v = ScalarField::for_overwrite(state.u.domain_ptr());
  const auto& s = state.spectra;
  for (std::size_t p = 0; p < v.size(); ++p) {
    switch (kind) {
      case FlowKind::DHYM:
        v[p] = s.cot_theta[p] - state.cot_theta0;
        break;
      case FlowKind::LBMCF:
        v[p] = state.theta0 - s.theta_at(p);
        break;
      case FlowKind::TLPF:
        v[p] = tlpf_velocity(state.theta0, s.theta_at(p));
        break;
    }
  }
  return v;
}

ScalarField velocity_of(const ClosedForm& chi, const ScalarField& u, FlowKind kind, double theta0,
                        double cot_theta0, double theta_guard) {
  const HermitianMatrixField w = chi.realize_with(u);
  const GridDomain& d = chi.domain();
  const int n = d.complex_dim();
  auto v = ScalarField::for_overwrite(u.domain_ptr());
  auto emit = [&](std::size_t p, const PhaseSample& ph) {
    switch (kind) {
      case FlowKind::DHYM:
        v[p] = ph.cot_theta - cot_theta0;
        break;
      case FlowKind::LBMCF:
        v[p] = theta0 - ph.theta;
        break;
      case FlowKind::TLPF:
        v[p] = tlpf_velocity(theta0, ph.theta);
        break;
    }
  };
  if (d.metric_is_identity() && n <= 2) {
    // prod(lambda + i) = det(w + i I) straight from the component planes.
    const double sin2_guard = std::sin(theta_guard) * std::sin(theta_guard);
    const bool need_theta = kind != FlowKind::DHYM;
    const auto w00 = w.real_plane(0, 0);
    const auto w11 = w.real_plane(n - 1, n - 1);
    const auto w01r = w.real_plane(0, n - 1);
    const auto w01i = w.imag_plane(0, n - 1);
    for (std::size_t p = 0; p < v.size(); ++p) {
      Complex prod;
      if (n == 1) {
        prod = Complex(w00[p], 1.0);
      } else {
        const double a = w00[p];
        const double dd = w11[p];
        const double br = w01r[p];
        const double bi = w01i[p];
        prod = Complex(a * dd - 1.0 - (br * br + bi * bi), a + dd);
      }
      if (!(prod.imag() > 0.0 && prod.imag() * prod.imag() > std::norm(prod) * sin2_guard)) {
        throw PhaseSingular("theta left (0, pi): prod(lambda + i) = (" + std::to_string(prod.real()) + ", " +
                            std::to_string(prod.imag()) + ")");
      }
      emit(p, {need_theta ? std::atan2(prod.imag(), prod.real()) : 0.0, prod.real() / prod.imag()});
    }
    return v;
  }
  for (std::size_t p = 0; p < v.size(); ++p) emit(p, phase_at(w.at(p), d, theta_guard));
  return v;
}

double stable_dt(const FlowState& state, double dt_safety) {
  const GridDomain& d = state.u.domain();
  const double pn = kPi * d.points_per_axis();
  double kappa = 0.0;
  for (int j = 0; j < d.complex_dim(); ++j) kappa += 2.0 * pn * pn * d.metric_inverse()(j, j).real();
  return dt_safety / (state.spectra.lambda_f_max * kappa);
}

HermitianMatrix mean_linearization(const FlowState& state, FlowKind kind) {
  const auto& s = state.spectra;
  const int n = s.n;
  HermitianMatrix acc = HermitianMatrix::Zero(n, n);
  for (std::size_t p = 0; p < s.size(); ++p) {
    double weight = 1.0;
    if (kind == FlowKind::LBMCF) {
      weight = 1.0 / s.csc2_theta[p];
    } else if (kind == FlowKind::TLPF) {
      const double c = std::cos(state.theta0 - s.theta_at(p));
      weight = 1.0 / (c * c * s.csc2_theta[p]);
    }
    acc += weight * s.F.at(p);
  }
  acc /= static_cast<double>(s.size());
  return 0.5 * (acc + acc.adjoint());
}

namespace {

FlowState step_from(const FlowState& state, const FlowConfig& config, double dt, const ScalarField* k1_given) {
  if (dt <= 0.0) {
    dt = stable_dt(state, config.dt_safety);
    if (config.stepper == Stepper::SemiImplicit) dt *= kSemiImplicitDtFactor;
  }
  const ClosedForm& chi = *state.chi;
  const FlowKind kind = config.kind;
  ScalarField owned;
  if (k1_given == nullptr) owned = velocity(state, kind);
  const ScalarField& k1 = k1_given != nullptr ? *k1_given : owned;
  switch (config.stepper) {
    case Stepper::ExplicitEuler: {
      ScalarField u = state.u;
      u.add_scaled(dt, k1);
      return advance(state, std::move(u), dt, kind);
    }
    case Stepper::RK4: {
      auto eval = [&](const ScalarField& base, double h, const ScalarField& k) {
        ScalarField trial = base;
        trial.add_scaled(h, k);
        if (!trial.all_finite()) throw NonFinite("non-finite RK4 stage at t = " + std::to_string(state.t));
        return velocity_of(chi, trial, kind, state.theta0, state.cot_theta0, state.theta_guard);
      };
      const ScalarField k2 = eval(state.u, 0.5 * dt, k1);
      const ScalarField k3 = eval(state.u, 0.5 * dt, k2);
      const ScalarField k4 = eval(state.u, dt, k3);
      ScalarField u = state.u;
      const double w = dt / 6.0;
      auto out = u.values();
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += w * (k1[p] + 2.0 * k2[p] + 2.0 * k3[p] + k4[p]);
      return advance(state, std::move(u), dt, kind);
    }
    case Stepper::SemiImplicit: {
      ScalarField u = state.u;
      u += semi_implicit_increment(state, k1, kind, dt);
      return advance(state, std::move(u), dt, kind);
    }
  }
  throw InvalidArgument("unknown stepper");
}

}  // namespace

FlowState step(const FlowState& state, const FlowConfig& config, double dt) {
  return step_from(state, config, dt, nullptr);
}

RunResult run(std::shared_ptr<const ClosedForm> chi, ScalarField u0, const FlowConfig& config,
              const RunHooks& hooks) {
  config.validate();
  const ScalarField usub = hooks.usub != nullptr ? *hooks.usub : u0;
  RunResult result;
  result.state = make_state(std::move(chi), std::move(u0), config.theta_guard);
  double next_snapshot = 0.0;
  auto maybe_snapshot = [&] {
    if (!hooks.on_snapshot || config.snapshot_every <= 0.0) return;
    if (result.state.t + 1e-12 >= next_snapshot) {
      hooks.on_snapshot(result.state);
      while (next_snapshot <= result.state.t + 1e-12) next_snapshot += config.snapshot_every;
    }
  };
  try {
    result.series.push_back(record(result.state, config.kind, usub, 0.0));
    maybe_snapshot();
    while (true) {
      const ScalarField v = velocity(result.state, config.kind);
      if (v.max_abs() < config.tol_stationary) {
        result.status = RunStatus::Converged;
        break;
      }
      const double remaining = config.max_time - result.state.t;
      if (remaining <= 1e-14 * std::max(1.0, config.max_time)) {
        result.status = RunStatus::ReachedMaxTime;
        break;
      }
      double dt = stable_dt(result.state, config.dt_safety);
      if (config.stepper == Stepper::SemiImplicit) dt *= kSemiImplicitDtFactor;
      dt = std::min(dt, remaining);
      FlowState next = step_from(result.state, config, dt, &v);
      if (remaining - dt <= 0.0) next.t = config.max_time;
      result.state = std::move(next);
      ++result.steps;
      result.series.push_back(record(result.state, config.kind, usub, dt));
      maybe_snapshot();
    }
  } catch (const PhaseSingular& e) {
    result.status = RunStatus::PhaseSingular;
    result.message = e.what();
  } catch (const TlpfRangeViolation& e) {
    result.status = RunStatus::TlpfRangeViolation;
    result.message = e.what();
  } catch (const NonFinite& e) {
    result.status = RunStatus::NonFinite;
    result.message = e.what();
  }
  return result;
}

}  // namespace dhym
