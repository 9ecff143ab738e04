#include "dhym/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include "dhym/angle_kernel.hpp"
#include "dhym/errors.hpp"

namespace dhym::oracles {

namespace {

constexpr double kPi = std::numbers::pi;
using Dense = Eigen::MatrixXcd;

Dense dense(const HermitianMatrix& m) { return Dense(m); }

// Inverse square root of g applied on both sides, via a plain Cholesky factor.
Dense whiten(const HermitianMatrix& a, const HermitianMatrix& g) {
  const Eigen::LLT<Dense> llt(dense(g));
  if (llt.info() != Eigen::Success) throw InvalidArgument("metric is not positive definite");
  const Dense l = llt.matrixL();
  const Dense linv = l.inverse();
  return linv * dense(a) * linv.adjoint();
}

double theta_sum(std::span<const double> lambda) {
  double s = 0.0;
  for (double x : lambda) s += 0.5 * kPi - std::atan(x);
  return s;
}

double cot_ratio(std::span<const double> lambda) {
  Complex p(1.0, 0.0);
  for (double x : lambda) p *= Complex(x, 1.0);
  return p.real() / p.imag();
}

int permutation_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i)
    for (std::size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::size_t shifted(const GridDomain& d, std::size_t point, int axis, int k) {
  const int n = d.points_per_axis();
  const int idx = d.axis_index(point, axis);
  const int moved = ((idx + k) % n + n) % n;
  return point + static_cast<std::size_t>(moved - idx) * d.stride(axis);
}

ScalarField fd_first(const ScalarField& u, int axis) {
  const GridDomain& d = u.domain();
  ScalarField out(u.domain_ptr());
  const double scale = 1.0 / (12.0 * d.spacing());
  for (std::size_t p = 0; p < u.size(); ++p) {
    out[p] = scale * (-u[shifted(d, p, axis, 2)] + 8.0 * u[shifted(d, p, axis, 1)] -
                      8.0 * u[shifted(d, p, axis, -1)] + u[shifted(d, p, axis, -2)]);
  }
  return out;
}

ScalarField fd_second(const ScalarField& u, int axis) {
  const GridDomain& d = u.domain();
  ScalarField out(u.domain_ptr());
  const double scale = 1.0 / (12.0 * d.spacing() * d.spacing());
  for (std::size_t p = 0; p < u.size(); ++p) {
    out[p] = scale * (-u[shifted(d, p, axis, 2)] + 16.0 * u[shifted(d, p, axis, 1)] - 30.0 * u[p] +
                      16.0 * u[shifted(d, p, axis, -1)] - u[shifted(d, p, axis, -2)]);
  }
  return out;
}

}  // namespace

RealVector char_poly_eigenvalues(const HermitianMatrix& a, const HermitianMatrix& g) {
  const Dense m = whiten(a, g);
  const auto n = static_cast<int>(m.rows());
  // Faddeev-LeVerrier: c[n] = 1, M_k = M M_{k-1} + c[n-k+1] I, c[n-k] = -tr(M M_k) / k.
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  Dense mk = Dense::Zero(n, n);
  const Dense id = Dense::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    mk = m * mk + c[static_cast<std::size_t>(n - k + 1)] * id;
    c[static_cast<std::size_t>(n - k)] = -(m * mk).trace().real() / k;
  }
  RealVector out(n);
  if (n == 1) {
    out(0) = -c[0];
    return out;
  }
  Eigen::VectorXd coeffs(n + 1);
  for (int k = 0; k <= n; ++k) coeffs(k) = c[static_cast<std::size_t>(k)];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  const auto& roots = solver.roots();
  for (int k = 0; k < n; ++k) out(k) = roots(k).real();
  std::sort(out.data(), out.data() + n, std::greater<double>());
  return out;
}

Complex mixed_determinant(std::span<const Eigen::MatrixXcd> mats) {
  if (mats.empty()) return {1.0, 0.0};
  const auto n = static_cast<int>(mats.size());
  for (const auto& m : mats) {
    if (m.rows() != n || m.cols() != n) throw InvalidArgument("mixed_determinant needs n matrices of size n");
  }
  std::vector<int> s(static_cast<std::size_t>(n));
  std::iota(s.begin(), s.end(), 0);
  Complex total(0.0, 0.0);
  double factorial = 1.0;
  for (int k = 2; k <= n; ++k) factorial *= k;
  do {
    const int sign_s = permutation_sign(s);
    std::vector<int> t(static_cast<std::size_t>(n));
    std::iota(t.begin(), t.end(), 0);
    do {
      Complex prod(static_cast<double>(sign_s * permutation_sign(t)), 0.0);
      for (int k = 0; k < n; ++k) {
        prod *= mats[static_cast<std::size_t>(k)](s[static_cast<std::size_t>(k)], t[static_cast<std::size_t>(k)]);
      }
      total += prod;
    } while (std::next_permutation(t.begin(), t.end()));
  } while (std::next_permutation(s.begin(), s.end()));
  return total / factorial;
}

Complex mixed_determinant(std::span<const HermitianMatrix> mats) {
  std::vector<Dense> d;
  d.reserve(mats.size());
  for (const auto& m : mats) d.push_back(dense(m));
  return mixed_determinant(std::span<const Dense>(d));
}

Complex mixed_wedge_ratio_bruteforce(const HermitianMatrix& a, const HermitianMatrix& b, const HermitianMatrix& g,
                                     int i) {
  const auto n = static_cast<int>(g.rows());
  if (i < 0 || i > n) throw InvalidArgument("wedge index out of range");
  const Dense ginv = dense(g).fullPivLu().inverse();
  const Dense id = Dense::Identity(n, n);
  const Dense ac = ginv * dense(a) + Complex(0.0, 1.0) * id;
  const Dense bc = ginv * dense(b) + Complex(0.0, 1.0) * id;
  std::vector<Dense> mats;
  for (int k = 0; k < n; ++k) mats.push_back(k < i ? ac : bc);
  return mixed_determinant(std::span<const Dense>(mats));
}

BruteSpectrum brute_spectrum(const HermitianMatrix& w, const HermitianMatrix& g) {
  BruteSpectrum out;
  out.lambda = char_poly_eigenvalues(w, g);
  out.cot_theta = cot_ratio(view(out.lambda));
  const Dense wd = dense(w);
  const Dense gd = dense(g);
  const Dense inner = wd * gd.fullPivLu().inverse() * wd + gd;
  const Dense f = (1.0 + out.cot_theta * out.cot_theta) * inner.fullPivLu().inverse();
  out.F = f;
  return out;
}

HermitianMatrixField fd_complex_hessian(const ScalarField& u) {
  const int n = u.domain().complex_dim();
  HermitianMatrixField out(u.domain_ptr());
  std::vector<ScalarField> first;
  for (int a = 0; a < 2 * n; ++a) first.push_back(fd_first(u, a));
  auto second = [&](int a, int b) { return a == b ? fd_second(u, a) : fd_first(first[static_cast<std::size_t>(b)], a); };
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      const ScalarField xx = second(2 * j, 2 * k);
      const ScalarField yy = second(2 * j + 1, 2 * k + 1);
      auto re = out.real_plane(j, k);
      for (std::size_t p = 0; p < u.size(); ++p) re[p] = 0.25 * (xx[p] + yy[p]);
      if (j == k) continue;
      const ScalarField xy = second(2 * j, 2 * k + 1);
      const ScalarField yx = second(2 * j + 1, 2 * k);
      auto im = out.imag_plane(j, k);
      for (std::size_t p = 0; p < u.size(); ++p) im[p] = 0.25 * (xy[p] - yx[p]);
    }
  }
  return out;
}

ScalarField random_band_limited(DomainPtr domain, int max_wavenumber, int modes, double amplitude,
                                std::uint64_t seed) {
  if (max_wavenumber < 1 || 2 * max_wavenumber >= domain->points_per_axis()) {
    throw InvalidArgument("max_wavenumber must lie in [1, N/2)");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> wave(-max_wavenumber, max_wavenumber);
  std::uniform_real_distribution<double> coeff(-amplitude, amplitude);
  std::vector<TrigMode> list;
  const int axes = domain->real_axes();
  while (static_cast<int>(list.size()) < modes) {
    TrigMode m;
    bool zero = true;
    for (int a = 0; a < axes; ++a) {
      m.wavenumbers[static_cast<std::size_t>(a)] = wave(rng);
      zero = zero && m.wavenumbers[static_cast<std::size_t>(a)] == 0;
    }
    m.cos_coeff = coeff(rng);
    m.sin_coeff = coeff(rng);
    if (!zero) list.push_back(m);
  }
  return trig_polynomial(std::move(domain), list);
}

LinearizationCheck fd_linearization_check(const ScalarField& u, const ScalarField& v, const ClosedForm& chi,
                                          std::span<const double> s_list) {
  if (s_list.size() < 2) throw InvalidArgument("need at least two step sizes");
  const GridDomain& d = u.domain();
  const HermitianMatrix& g = d.metric();
  const HermitianMatrixField w = chi.realize_with(u);
  const HermitianMatrixField hv = complex_hessian(v);
  const std::size_t points = d.total_points();

  std::vector<double> reference(points);
  for (std::size_t p = 0; p < points; ++p) {
    const BruteSpectrum b = brute_spectrum(w.at(p), g);
    const double theta = theta_sum(view(b.lambda));
    if (!(theta > 0.0 && theta < kPi)) throw PhaseSingular("theta left (0, pi) at the base point");
    reference[p] = (Dense(b.F) * dense(hv.at(p))).trace().real();
  }

  LinearizationCheck out;
  std::vector<double> lx;
  std::vector<double> ly;
  for (double s : s_list) {
    ScalarField up = u;
    up.add_scaled(s, v);
    ScalarField um = u;
    um.add_scaled(-s, v);
    const HermitianMatrixField wp = chi.realize_with(up);
    const HermitianMatrixField wm = chi.realize_with(um);
    double err = 0.0;
    for (std::size_t p = 0; p < points; ++p) {
      const RealVector lp = char_poly_eigenvalues(wp.at(p), g);
      const RealVector lm = char_poly_eigenvalues(wm.at(p), g);
      for (const RealVector* l : {&lp, &lm}) {
        const double theta = theta_sum(view(*l));
        if (!(theta > 0.0 && theta < kPi)) throw PhaseSingular("theta left (0, pi) for a tested step");
      }
      const double fd = (cot_ratio(view(lp)) - cot_ratio(view(lm))) / (2.0 * s);
      err = std::max(err, std::abs(fd - reference[p]));
    }
    out.s.push_back(s);
    out.max_error.push_back(err);
    if (err > 0.0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(err));
    }
  }
  out.slope = lx.size() >= 2 ? least_squares_slope(lx, ly) : 0.0;
  out.pass = lx.size() >= 2 && std::abs(out.slope - 2.0) <= 0.1;
  return out;
}

DomainPtr HeatFlowOracle::domain() const { return build_domain(1, points_per_axis); }

ClosedForm HeatFlowOracle::chi() const {
  const DomainPtr d = domain();
  HermitianMatrix one(1, 1);
  one(0, 0) = 1.0;
  const std::array<TrigMode, 1> mode{TrigMode{{1, 0, 0, 0, 0, 0}, -a / (kPi * kPi), 0.0}};
  return ClosedForm(one, trig_polynomial(d, mode));
}

double HeatFlowOracle::amplitude(double t) const { return a / (kPi * kPi) * (1.0 - std::exp(-kPi * kPi * t)); }

ScalarField HeatFlowOracle::solution(double t) const {
  const std::array<TrigMode, 1> mode{TrigMode{{1, 0, 0, 0, 0, 0}, amplitude(t), 0.0}};
  return trig_polynomial(domain(), mode);
}

double HeatFlowOracle::decay_rate() const { return kPi * kPi; }

double HeatFlowOracle::theta0() const { return 0.25 * kPi; }

HeatFlowOracle heat_flow_oracle(double a, int points_per_axis) {
  if (!(std::abs(a) < 1.0)) throw InvalidArgument("heat oracle needs |a| < 1");
  build_domain(1, points_per_axis);
  return HeatFlowOracle{a, points_per_axis};
}

RefinementTable refinement_study(const std::function<RefinementSample(int)>& scenario,
                                 std::span<const int> points_per_axis) {
  if (points_per_axis.empty()) throw InvalidArgument("empty grid list");
  if (!std::is_sorted(points_per_axis.begin(), points_per_axis.end())) {
    throw InvalidArgument("grid list must be ascending");
  }
  std::vector<RefinementSample> samples;
  for (int n : points_per_axis) samples.push_back(scenario(n));
  const RefinementSample& finest = samples.back();

  RefinementTable table;
  for (const RefinementSample& s : samples) {
    RefinementRow row;
    row.points_per_axis = s.points_per_axis;
    row.theta0 = s.theta0;
    row.theta0_error = std::abs(s.theta0 - finest.theta0);
    row.im_cy_drift = s.im_cy_drift;
    ScalarField diff = resample(s.final_u, finest.final_u.domain_ptr());
    diff -= finest.final_u;
    const double mean = diff.mean();
    double sup = 0.0;
    for (double x : diff.values()) sup = std::max(sup, std::abs(x - mean));
    row.state_error = sup;
    table.rows.push_back(row);
  }
  constexpr double slack = 1e-14;
  for (std::size_t k = 1; k + 1 < table.rows.size(); ++k) {
    const RefinementRow& prev = table.rows[k - 1];
    const RefinementRow& cur = table.rows[k];
    table.theta0_monotone = table.theta0_monotone && cur.theta0_error <= prev.theta0_error + slack;
    table.state_monotone = table.state_monotone && cur.state_error <= prev.state_error + slack;
  }
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    table.drift_monotone =
        table.drift_monotone && table.rows[k].im_cy_drift <= table.rows[k - 1].im_cy_drift + slack;
  }
  return table;
}

ConeSampler::ConeSampler(int n, double tau, std::uint64_t seed, double margin)
    : n_(n), tau_(tau), margin_(margin), rng_(seed) {
  if (n < 1 || n > kMaxComplexDim) throw InvalidArgument("n must be 1, 2 or 3");
  if (!(tau > n * margin && tau < kPi)) throw InvalidArgument("tau must lie in (n margin, pi)");
}

RealVector ConeSampler::next() {
  std::uniform_real_distribution<double> angle(margin_, kPi - margin_);
  std::array<double, kMaxComplexDim> phi{};
  while (true) {
    ++drawn_;
    double sum = 0.0;
    for (int i = 0; i < n_; ++i) {
      phi[static_cast<std::size_t>(i)] = angle(rng_);
      sum += phi[static_cast<std::size_t>(i)];
    }
    if (sum < tau_) break;
  }
  RealVector lambda(n_);
  for (int i = 0; i < n_; ++i) lambda(i) = 1.0 / std::tan(phi[static_cast<std::size_t>(i)]);
  return lambda;
}

ConcavityReport concavity_sampler(int n, double tau, std::size_t count, std::uint64_t seed) {
  ConeSampler sampler(n, tau, seed);
  ConcavityReport report;
  for (std::size_t k = 0; k < count; ++k) {
    const RealVector lambda = sampler.next();
    const RealMatrix h = cot_theta_hessian(view(lambda));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(h), Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (k == 0 || top > report.max_eigenvalue) report.max_eigenvalue = top;
    if (top > 1e-9) ++report.violations;

    // Second differences of Re P / Im P with steps scaled to each coordinate.
    Eigen::MatrixXd fd(n, n);
    std::array<double, kMaxComplexDim> step{};
    for (int i = 0; i < n; ++i) step[static_cast<std::size_t>(i)] = 1e-4 * (1.0 + std::abs(lambda(i)));
    auto f = [&](int i, double di, int j, double dj) {
      RealVector x = lambda;
      x(i) += di;
      x(j) += dj;
      return cot_ratio(view(x));
    };
    const double f0 = cot_ratio(view(lambda));
    for (int i = 0; i < n; ++i) {
      const double hi = step[static_cast<std::size_t>(i)];
      fd(i, i) = (f(i, hi, i, 0.0) - 2.0 * f0 + f(i, -hi, i, 0.0)) / (hi * hi);
      for (int j = i + 1; j < n; ++j) {
        const double hj = step[static_cast<std::size_t>(j)];
        fd(i, j) = (f(i, hi, j, hj) - f(i, hi, j, -hj) - f(i, -hi, j, hj) + f(i, -hi, j, -hj)) / (4.0 * hi * hj);
        fd(j, i) = fd(i, j);
      }
    }
    const double scale = 1.0 + Eigen::MatrixXd(h).cwiseAbs().maxCoeff();
    report.max_fd_error = std::max(report.max_fd_error, (fd - Eigen::MatrixXd(h)).cwiseAbs().maxCoeff() / scale);
    ++report.samples;
  }
  report.drawn = sampler.drawn();
  return report;
}

ConeReport cone_inequality_sampler(int n, double tau, std::size_t count, std::uint64_t seed) {
  ConeSampler sampler(n, tau, seed);
  std::mt19937_64 mix(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ConeReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  RealVector previous;
  for (std::size_t k = 0; k < count; ++k) {
    const RealVector lambda = sampler.next();
    const StructuralReport s = structural_inequalities(view(lambda), tau);
    if (n >= 2) {
      const double m = *std::min_element(s.margins.begin(), s.margins.end());
      report.worst_margin = std::min(report.worst_margin, m);
      if (!s.precondition_ok || m < -1e-9) ++report.violations;
    } else if (!s.precondition_ok) {
      ++report.violations;
    }
    if (k > 0) {
      const double t = unit(mix);
      const RealVector mid = t * lambda + (1.0 - t) * previous;
      if (!(theta_sum(view(mid)) < tau + 1e-12)) ++report.convexity_violations;
    }
    previous = lambda;
    ++report.samples;
  }
  return report;
}

}  // namespace dhym::oracles
