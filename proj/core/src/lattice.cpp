#include "dhym/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dhym/errors.hpp"
#include "fourier_plans.hpp"

namespace dhym {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Symbol of d^2/(dx_a dx_b) for e^{2 pi i m.x}.
double second_derivative_symbol(const Wavenumbers& k, int a, int b) {
  if (a == b) {
    const double w = kTwoPi * k[a];
    return -w * w;
  }
  if (k.is_nyquist(a) || k.is_nyquist(b)) return 0.0;
  return -kTwoPi * kTwoPi * static_cast<double>(k[a]) * static_cast<double>(k[b]);
}

}  // namespace

namespace detail {

namespace {

constexpr std::size_t kAlignment = 64;
constexpr std::size_t kPoolMinBytes = std::size_t{1} << 16;
constexpr std::size_t kPoolMaxBytes = std::size_t{1} << 27;

// Thread-local objects die before statics, so fields held in globals can be
// released after the pool is gone. Those go straight to std::free.
thread_local bool pool_alive = false;

struct BlockPool {
  std::vector<std::pair<std::size_t, void*>> free;
  std::size_t held = 0;

  BlockPool() { pool_alive = true; }
  ~BlockPool() {
    pool_alive = false;
    for (auto& [bytes, p] : free) std::free(p);
  }
};

BlockPool& pool() {
  thread_local BlockPool instance;
  return instance;
}

std::size_t rounded(std::size_t bytes) {
  return bytes == 0 ? kAlignment : (bytes + kAlignment - 1) / kAlignment * kAlignment;
}

}  // namespace

void* aligned_acquire(std::size_t bytes) {
  const std::size_t size = rounded(bytes);
  if (size >= kPoolMinBytes) {
    BlockPool& bp = pool();
    for (std::size_t k = bp.free.size(); k-- > 0;) {
      if (bp.free[k].first == size) {
        void* p = bp.free[k].second;
        bp.free.erase(bp.free.begin() + static_cast<std::ptrdiff_t>(k));
        bp.held -= size;
        return p;
      }
    }
  }
  void* p = std::aligned_alloc(kAlignment, size);
  if (p == nullptr) throw std::bad_alloc();
  return p;
}

void aligned_release(void* p, std::size_t bytes) noexcept {
  if (p == nullptr) return;
  const std::size_t size = rounded(bytes);
  if (size >= kPoolMinBytes && pool_alive) {
    BlockPool& bp = pool();
    if (bp.held + size <= kPoolMaxBytes) {
      try {
        bp.free.emplace_back(size, p);
        bp.held += size;
        return;
      } catch (...) {
      }
    }
  }
  std::free(p);
}

}  // namespace detail

// ---------------------------------------------------------------------------------
// GridDomain

int GridDomain::axis_index(std::size_t point, int axis) const {
  return static_cast<int>((point / strides_[static_cast<std::size_t>(axis)]) % static_cast<std::size_t>(points_per_axis_));
}

bool GridDomain::compatible_with(const GridDomain& other) const {
  if (this == &other) return true;
  return n_ == other.n_ && points_per_axis_ == other.points_per_axis_ &&
         (metric_ - other.metric_).cwiseAbs().maxCoeff() == 0.0;
}

DomainPtr build_domain(int n, int points_per_axis, const HermitianMatrix& metric) {
  if (n < 1 || n > kMaxComplexDim) {
    throw InvalidArgument("complex dimension must be 1, 2 or 3, got " + std::to_string(n));
  }
  if (points_per_axis < 8 || points_per_axis % 2 != 0) {
    throw InvalidArgument("points per axis must be even and >= 8, got " + std::to_string(points_per_axis));
  }
  if (metric.rows() != n || metric.cols() != n) {
    throw InvalidArgument("metric must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!metric.allFinite()) throw InvalidArgument("metric has non-finite entries");
  const double scale = std::max(1.0, metric.cwiseAbs().maxCoeff());
  if ((metric - metric.adjoint()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw InvalidArgument("metric is not Hermitian");
  }
  const HermitianMatrix sym = 0.5 * (metric + metric.adjoint());
  Eigen::LLT<HermitianMatrix> llt(sym);
  if (llt.info() != Eigen::Success) throw InvalidArgument("metric is not positive definite");
  HermitianMatrix lower = llt.matrixL();
  for (int i = 0; i < n; ++i) {
    if (!(lower(i, i).real() > 0.0)) throw InvalidArgument("metric is not positive definite");
  }

  auto domain = std::shared_ptr<GridDomain>(new GridDomain());
  domain->n_ = n;
  domain->points_per_axis_ = points_per_axis;
  const int rank = 2 * n;
  std::size_t total = 1;
  for (int a = rank - 1; a >= 0; --a) {
    domain->strides_[static_cast<std::size_t>(a)] = total;
    total *= static_cast<std::size_t>(points_per_axis);
  }
  domain->total_points_ = total;
  domain->metric_ = sym;
  domain->metric_inverse_ = llt.solve(HermitianMatrix::Identity(n, n));
  domain->metric_inverse_ = 0.5 * (domain->metric_inverse_ + domain->metric_inverse_.adjoint()).eval();
  domain->metric_cholesky_ = lower;
  domain->metric_is_identity_ = (sym - HermitianMatrix::Identity(n, n)).cwiseAbs().maxCoeff() == 0.0;
  domain->plans_ = detail::plans_for(rank, points_per_axis);
  return domain;
}

DomainPtr build_domain(int n, int points_per_axis) {
  if (n < 1 || n > kMaxComplexDim) {
    throw InvalidArgument("complex dimension must be 1, 2 or 3, got " + std::to_string(n));
  }
  return build_domain(n, points_per_axis, HermitianMatrix::Identity(n, n));
}

// ---------------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(DomainPtr domain) : domain_(std::move(domain)) {
  if (!domain_) throw InvalidArgument("null domain");
  values_.assign(domain_->total_points(), 0.0);
}

ScalarField ScalarField::for_overwrite(DomainPtr domain) {
  if (!domain) throw InvalidArgument("null domain");
  ScalarField f;
  f.domain_ = std::move(domain);
  f.values_.resize(f.domain_->total_points());
  return f;
}

ScalarField::ScalarField(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(values.begin(), values.end()) {
  if (!domain_) throw InvalidArgument("null domain");
  if (values_.size() != domain_->total_points()) {
    throw InvalidArgument("field length " + std::to_string(values_.size()) + " does not match domain size " +
                          std::to_string(domain_->total_points()));
  }
}

ScalarField ScalarField::from_function(DomainPtr domain, const std::function<double(std::span<const double>)>& f) {
  ScalarField out(std::move(domain));
  const auto& d = out.domain();
  std::array<double, kMaxRealAxes> coords{};
  const std::span<const double> view(coords.data(), static_cast<std::size_t>(d.real_axes()));
  for (std::size_t p = 0; p < out.size(); ++p) {
    for (int a = 0; a < d.real_axes(); ++a) coords[static_cast<std::size_t>(a)] = d.coordinate(p, a);
    out.values_[p] = f(view);
  }
  return out;
}

ScalarField ScalarField::constant(DomainPtr domain, double value) {
  ScalarField out(std::move(domain));
  std::fill(out.values_.begin(), out.values_.end(), value);
  return out;
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::mean() const { return integrate(*this); }

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void ScalarField::check_same_domain(const ScalarField& other) const {
  if (!domain_->compatible_with(*other.domain_)) throw InvalidArgument("fields live on different domains");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  check_same_domain(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  check_same_domain(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::add_scaled(double a, const ScalarField& x) {
  check_same_domain(x);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

// ---------------------------------------------------------------------------------
// HermitianMatrixField

HermitianMatrixField::HermitianMatrixField(DomainPtr domain) : domain_(std::move(domain)) {
  if (!domain_) throw InvalidArgument("null domain");
  const int n = domain_->complex_dim();
  const auto pairs = static_cast<std::size_t>(n * (n + 1) / 2);
  re_.resize(pairs);
  im_.resize(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    re_[k].assign(domain_->total_points(), 0.0);
    im_[k].assign(domain_->total_points(), 0.0);
  }
}

HermitianMatrixField HermitianMatrixField::for_overwrite(DomainPtr domain) {
  if (!domain) throw InvalidArgument("null domain");
  HermitianMatrixField f;
  f.domain_ = std::move(domain);
  const int n = f.dim();
  const std::size_t points = f.domain_->total_points();
  f.re_.resize(static_cast<std::size_t>(n * (n + 1) / 2));
  f.im_.resize(f.re_.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto k = static_cast<std::size_t>(f.pair_index(i, j));
      f.re_[k].resize(points);
      if (i == j) {
        f.im_[k].assign(points, 0.0);
      } else {
        f.im_[k].resize(points);
      }
    }
  }
  return f;
}

Complex HermitianMatrixField::entry(std::size_t point, int i, int j) const {
  const int k = pair_index(i, j);
  const double re = re_[static_cast<std::size_t>(k)][point];
  const double im = im_[static_cast<std::size_t>(k)][point];
  if (i == j) return {re, 0.0};
  return i < j ? Complex(re, im) : Complex(re, -im);
}

HermitianMatrix HermitianMatrixField::at(std::size_t point) const {
  const int n = dim();
  HermitianMatrix m(n, n);
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++k) {
      const double re = re_[k][point];
      if (i == j) {
        m(i, i) = re;
      } else {
        const double im = im_[k][point];
        m(i, j) = Complex(re, im);
        m(j, i) = Complex(re, -im);
      }
    }
  }
  return m;
}

void HermitianMatrixField::set(std::size_t point, const HermitianMatrix& m) {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto k = static_cast<std::size_t>(pair_index(i, j));
      const Complex v = 0.5 * (m(i, j) + std::conj(m(j, i)));
      re_[k][point] = v.real();
      im_[k][point] = i == j ? 0.0 : v.imag();
    }
  }
}

void HermitianMatrixField::add_constant(const HermitianMatrix& c) {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto k = static_cast<std::size_t>(pair_index(i, j));
      const Complex v = 0.5 * (c(i, j) + std::conj(c(j, i)));
      for (double& x : re_[k]) x += v.real();
      if (i != j) {
        for (double& x : im_[k]) x += v.imag();
      }
    }
  }
}

HermitianMatrixField& HermitianMatrixField::operator+=(const HermitianMatrixField& other) {
  return add_scaled(1.0, other);
}

HermitianMatrixField& HermitianMatrixField::add_scaled(double a, const HermitianMatrixField& other) {
  if (!domain_->compatible_with(*other.domain_)) throw InvalidArgument("fields live on different domains");
  for (std::size_t k = 0; k < re_.size(); ++k) {
    for (std::size_t p = 0; p < re_[k].size(); ++p) {
      re_[k][p] += a * other.re_[k][p];
      im_[k][p] += a * other.im_[k][p];
    }
  }
  return *this;
}

// ---------------------------------------------------------------------------------
// Spectral operations

Spectrum::Spectrum(const ScalarField& u) : domain_(u.domain_ptr()) {
  const auto& plans = domain_->fourier();
  coeffs_.resize(plans.complex_size());
  plans.forward(u.values().data(), coeffs_.data());
}

Wavenumbers Spectrum::wavenumbers(std::size_t k) const {
  const auto& plans = domain_->fourier();
  return {plans.wavenumbers(k), plans.rank(), plans.points_per_axis() / 2};
}

ScalarField Spectrum::synthesize(AlignedVector<Complex> coefficients) const {
  const auto& plans = domain_->fourier();
  if (coefficients.size() != plans.complex_size()) throw InvalidArgument("coefficient array has wrong size");
  auto out = ScalarField::for_overwrite(domain_);
  plans.inverse(coefficients.data(), out.values().data());
  return out;
}

HermitianMatrixField complex_hessian(const Spectrum& u_hat, const HermitianMatrix* constant) {
  auto out = HermitianMatrixField::for_overwrite(u_hat.domain_ptr());
  const int n = out.dim();
  const auto& plans = u_hat.domain_ptr()->fourier();
  const auto& symbols = plans.hessian_symbols();
  const auto coeffs = u_hat.coefficients();
  AlignedVector<Complex> work(coeffs.size());
  std::size_t t = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int part = 0; part < (i == j ? 1 : 2); ++part, ++t) {
        const double* sym = symbols[t].data();
        for (std::size_t k = 0; k < coeffs.size(); ++k) work[k] = coeffs[k] * sym[k];
        if (constant != nullptr) {
          const Complex v = (*constant)(i, j);
          work[0] += part == 0 ? v.real() : v.imag();
        }
        plans.inverse(work.data(), (part == 0 ? out.real_plane(i, j) : out.imag_plane(i, j)).data(), false);
      }
    }
  }
  return out;
}

HermitianMatrixField complex_hessian(const ScalarField& u) { return complex_hessian(Spectrum(u)); }

HermitianMatrixField complex_hessian(const ScalarField& u, const HermitianMatrix& constant) {
  return complex_hessian(Spectrum(u), &constant);
}

ScalarField derivative(const ScalarField& u, int axis) {
  if (axis < 0 || axis >= u.domain().real_axes()) throw InvalidArgument("axis out of range");
  return Spectrum(u).apply([axis](const Wavenumbers& k) {
    return k.is_nyquist(axis) ? Complex(0.0) : Complex(0.0, kTwoPi * k[axis]);
  });
}

ScalarField second_derivative(const ScalarField& u, int axis_a, int axis_b) {
  const int rank = u.domain().real_axes();
  if (axis_a < 0 || axis_a >= rank || axis_b < 0 || axis_b >= rank) throw InvalidArgument("axis out of range");
  return Spectrum(u).apply(
      [axis_a, axis_b](const Wavenumbers& k) { return second_derivative_symbol(k, axis_a, axis_b); });
}

ScalarField holomorphic_gradient_norm(const ScalarField& u) { return holomorphic_gradient_norm(Spectrum(u)); }

ScalarField holomorphic_gradient_norm(const Spectrum& u_hat) {
  const auto& d = *u_hat.domain_ptr();
  const int n = d.complex_dim();
  const auto& plans = d.fourier();
  const auto coeffs = u_hat.coefficients();
  // Half of each real partial: Re u_z = u_x / 2, Im u_z = -u_y / 2.
  const auto& symbols = plans.half_gradient_symbols();
  const double norm = 1.0 / static_cast<double>(plans.real_size());
  AlignedVector<Complex> work(coeffs.size());
  auto half_partial = [&](int a, double* out) {
    const double* sym = symbols[static_cast<std::size_t>(a)].data();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      work[k] = Complex(-coeffs[k].imag() * sym[k], coeffs[k].real() * sym[k]);
    }
    plans.inverse(work.data(), out, false);
  };
  auto out = ScalarField::for_overwrite(u_hat.domain_ptr());
  if (d.metric_is_identity()) {
    auto part = ScalarField::for_overwrite(u_hat.domain_ptr());
    for (int a = 0; a < 2 * n; ++a) {
      half_partial(a, part.values().data());
      for (std::size_t p = 0; p < out.size(); ++p) {
        const double h = part[p] * norm;
        out[p] = a == 0 ? h * h : out[p] + h * h;
      }
    }
    return out;
  }
  std::vector<ScalarField> halves;
  halves.reserve(static_cast<std::size_t>(2 * n));
  for (int a = 0; a < 2 * n; ++a) {
    ScalarField& part = halves.emplace_back(ScalarField::for_overwrite(u_hat.domain_ptr()));
    half_partial(a, part.values().data());
    part *= norm;
  }
  const HermitianMatrix& ginv = d.metric_inverse();
  std::array<Complex, kMaxComplexDim> uz{};
  for (std::size_t p = 0; p < out.size(); ++p) {
    for (int k = 0; k < n; ++k) {
      uz[static_cast<std::size_t>(k)] =
          Complex(halves[static_cast<std::size_t>(2 * k)][p], -halves[static_cast<std::size_t>(2 * k + 1)][p]);
    }
    Complex acc = 0.0;
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        acc += std::conj(uz[static_cast<std::size_t>(l)]) * ginv(l, k) * uz[static_cast<std::size_t>(k)];
      }
    }
    out[p] = std::max(acc.real(), 0.0);
  }
  return out;
}

double integrate(std::span<const double> values, const GridDomain& domain) {
  if (values.size() != domain.total_points()) throw InvalidArgument("integrand length does not match domain");
  detail::CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value() * domain.cell_weight();
}

Complex integrate(std::span<const Complex> values, const GridDomain& domain) {
  if (values.size() != domain.total_points()) throw InvalidArgument("integrand length does not match domain");
  detail::CompensatedSum re;
  detail::CompensatedSum im;
  for (const Complex& v : values) {
    re.add(v.real());
    im.add(v.imag());
  }
  return Complex(re.value(), im.value()) * domain.cell_weight();
}

double integrate(const ScalarField& f) { return integrate(f.values(), f.domain()); }

ScalarField resample(const ScalarField& u, DomainPtr target) {
  const auto& src = u.domain();
  if (!target) throw InvalidArgument("null target domain");
  if (target->complex_dim() != src.complex_dim() ||
      (target->metric() - src.metric()).cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidArgument("resample requires the same complex dimension and metric");
  }
  if (target->points_per_axis() == src.points_per_axis()) return ScalarField(target, {u.values().begin(), u.values().end()});

  const Spectrum u_hat(u);
  const auto& tgt_plans = target->fourier();
  const auto& src_plans = src.fourier();
  const int cutoff = std::min(src.points_per_axis(), target->points_per_axis()) / 2;
  const double scale = static_cast<double>(target->total_points()) / static_cast<double>(src.total_points());
  AlignedVector<Complex> coeffs(tgt_plans.complex_size(), Complex(0.0));
  std::array<int, kMaxRealAxes> m{};
  const int rank = target->real_axes();
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const std::int16_t* w = tgt_plans.wavenumbers(k);
    bool keep = true;
    for (int a = 0; a < rank; ++a) {
      m[static_cast<std::size_t>(a)] = w[a];
      if (std::abs(static_cast<int>(w[a])) >= cutoff) keep = false;
    }
    if (!keep) continue;
    const std::ptrdiff_t j = src_plans.index_of(m.data());
    if (j >= 0) coeffs[k] = scale * u_hat.coefficients()[static_cast<std::size_t>(j)];
  }
  ScalarField out(target);
  tgt_plans.inverse(coeffs.data(), out.values().data());
  return out;
}

ScalarField trig_polynomial(DomainPtr domain, std::span<const TrigMode> modes) {
  ScalarField out(std::move(domain));
  const auto& d = out.domain();
  const int rank = d.real_axes();
  const long big_n = d.points_per_axis();
  for (std::size_t p = 0; p < out.size(); ++p) {
    double acc = 0.0;
    for (const TrigMode& mode : modes) {
      // Reduce m.i modulo N in integers so the phase is exact.
      long s = 0;
      for (int a = 0; a < rank; ++a) s += static_cast<long>(mode.wavenumbers[static_cast<std::size_t>(a)]) * d.axis_index(p, a);
      s %= big_n;
      if (s < 0) s += big_n;
      const double phase = kTwoPi * static_cast<double>(s) / static_cast<double>(big_n);
      acc += mode.cos_coeff * std::cos(phase) + mode.sin_coeff * std::sin(phase);
    }
    out[p] = acc;
  }
  return out;
}

}  // namespace dhym
