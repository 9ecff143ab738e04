#pragma once

// Flat complex torus C^n / Z^{2n} sampled on a uniform periodic grid, scalar and
// Hermitian-matrix valued fields on it, Fourier-spectral differentiation and
// uniform quadrature.
//
// Real coordinates are ordered (x1, y1, ..., xn, yn) with z_j = x_j + i y_j.
// Point indices are row-major over that order: x1 varies slowest, yn fastest.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace dhym {

using Complex = std::complex<double>;
/// Small (n <= 3) complex matrix; stack allocated.
using HermitianMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using RealVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr int kMaxComplexDim = 3;
inline constexpr int kMaxRealAxes = 2 * kMaxComplexDim;

namespace detail {
class FourierPlans;

/// 64-byte aligned blocks. Large blocks are recycled per thread so that field
/// temporaries do not fault fresh pages on every step.
void* aligned_acquire(std::size_t bytes);
void aligned_release(void* p, std::size_t bytes) noexcept;

/// 64-byte aligned storage so FFTW can use its SIMD kernels on field data directly.
template <class T>
struct AlignedAllocator {
  using value_type = T;

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) { return static_cast<T*>(aligned_acquire(count * sizeof(T))); }
  /// Value-less construction leaves trivially copyable elements (double,
  /// std::complex<double>) unset, so resize() does not zero-fill. Construction
  /// with a value behaves as usual.
  template <class U>
  void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
    if constexpr (!(std::is_trivially_copyable_v<U> && std::is_trivially_destructible_v<U>)) {
      ::new (static_cast<void*>(p)) U;
    }
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
  void deallocate(T* p, std::size_t count) noexcept { aligned_release(p, count * sizeof(T)); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};
}  // namespace detail

template <class T>
using AlignedVector = std::vector<T, detail::AlignedAllocator<T>>;

class GridDomain;
using DomainPtr = std::shared_ptr<const GridDomain>;

class GridDomain {
 public:
  int complex_dim() const { return n_; }
  int real_axes() const { return 2 * n_; }
  int points_per_axis() const { return points_per_axis_; }
  double spacing() const { return 1.0 / points_per_axis_; }
  std::size_t total_points() const { return total_points_; }
  /// Weight of one grid point in the unit-mass quadrature, h^{2n}.
  double cell_weight() const { return 1.0 / static_cast<double>(total_points_); }

  const HermitianMatrix& metric() const { return metric_; }
  const HermitianMatrix& metric_inverse() const { return metric_inverse_; }
  /// Lower-triangular L with g = L L^*.
  const HermitianMatrix& metric_cholesky() const { return metric_cholesky_; }
  bool metric_is_identity() const { return metric_is_identity_; }

  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  int axis_index(std::size_t point, int axis) const;
  double coordinate(std::size_t point, int axis) const { return axis_index(point, axis) * spacing(); }

  /// Same n, N and metric.
  bool compatible_with(const GridDomain& other) const;

  const detail::FourierPlans& fourier() const { return *plans_; }

 private:
  friend DomainPtr build_domain(int n, int points_per_axis, const HermitianMatrix& metric);

  GridDomain() = default;

  int n_ = 0;
  int points_per_axis_ = 0;
  std::size_t total_points_ = 0;
  std::array<std::size_t, kMaxRealAxes> strides_{};
  HermitianMatrix metric_;
  HermitianMatrix metric_inverse_;
  HermitianMatrix metric_cholesky_;
  bool metric_is_identity_ = true;
  std::shared_ptr<const detail::FourierPlans> plans_;
};

/// Throws InvalidArgument for n outside {1,2,3}, odd or too small N, or a metric
/// that is not Hermitian (1e-14) and positive definite.
DomainPtr build_domain(int n, int points_per_axis, const HermitianMatrix& metric);
DomainPtr build_domain(int n, int points_per_axis);

class ScalarField {
 public:
  /// Empty field with no domain; only assignment is meaningful.
  ScalarField() = default;
  explicit ScalarField(DomainPtr domain);
  ScalarField(DomainPtr domain, std::vector<double> values);
  /// Field with unset values, for callers that write every entry.
  static ScalarField for_overwrite(DomainPtr domain);

  /// Samples f(coords) at every grid point; coords has length 2n.
  static ScalarField from_function(DomainPtr domain,
                                   const std::function<double(std::span<const double>)>& f);
  static ScalarField constant(DomainPtr domain, double value);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double max() const;
  double min() const;
  double max_abs() const;
  double mean() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  /// this += a * x
  ScalarField& add_scaled(double a, const ScalarField& x);

 private:
  void check_same_domain(const ScalarField& other) const;

  DomainPtr domain_;
  AlignedVector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Per-point n x n Hermitian matrices, stored as component planes of the upper
/// triangle (diagonal entries are real).
class HermitianMatrixField {
 public:
  HermitianMatrixField() = default;
  explicit HermitianMatrixField(DomainPtr domain);
  /// Field whose off-diagonal and real planes are left unset, for callers that
  /// write every entry.
  static HermitianMatrixField for_overwrite(DomainPtr domain);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  int dim() const { return domain_->complex_dim(); }
  std::size_t size() const { return domain_->total_points(); }

  /// Component planes for i <= j. imag(i, i) is identically zero.
  std::span<const double> real_plane(int i, int j) const { return re_[pair_index(i, j)]; }
  std::span<double> real_plane(int i, int j) { return re_[pair_index(i, j)]; }
  std::span<const double> imag_plane(int i, int j) const { return im_[pair_index(i, j)]; }
  std::span<double> imag_plane(int i, int j) { return im_[pair_index(i, j)]; }

  Complex entry(std::size_t point, int i, int j) const;
  HermitianMatrix at(std::size_t point) const;
  void set(std::size_t point, const HermitianMatrix& m);

  void add_constant(const HermitianMatrix& c);
  HermitianMatrixField& operator+=(const HermitianMatrixField& other);
  HermitianMatrixField& add_scaled(double a, const HermitianMatrixField& other);

 private:
  int pair_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return i * dim() - i * (i - 1) / 2 + (j - i);
  }

  DomainPtr domain_;
  std::vector<AlignedVector<double>> re_;
  std::vector<AlignedVector<double>> im_;
};

/// Integer wavenumber vector of one Fourier coefficient.
struct Wavenumbers {
  const std::int16_t* m;
  int rank;
  int nyquist;

  int operator[](int axis) const { return m[axis]; }
  bool is_nyquist(int axis) const { return m[axis] == nyquist || m[axis] == -nyquist; }
};

/// Real-to-complex Fourier transform of a field, in the half-complex layout of the
/// last axis. Coefficients are unnormalized.
class Spectrum {
 public:
  explicit Spectrum(const ScalarField& u);

  const DomainPtr& domain_ptr() const { return domain_; }
  std::span<const Complex> coefficients() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  Wavenumbers wavenumbers(std::size_t k) const;

  /// Multiplies every coefficient by mult(Wavenumbers) and transforms back.
  template <class Multiplier>
  ScalarField apply(Multiplier&& mult) const {
    AlignedVector<Complex> work(coeffs_.size());
    for (std::size_t k = 0; k < coeffs_.size(); ++k) work[k] = coeffs_[k] * Complex(mult(wavenumbers(k)));
    return synthesize(std::move(work));
  }

  /// Inverse transform of arbitrary coefficients in this domain's layout.
  ScalarField synthesize(AlignedVector<Complex> coefficients) const;

 private:
  DomainPtr domain_;
  AlignedVector<Complex> coeffs_;
};

/// u_{j\bar k} = d^2 u / dz_j d\bar z_k via Fourier multipliers.
HermitianMatrixField complex_hessian(const ScalarField& u);
HermitianMatrixField complex_hessian(const Spectrum& u_hat, const HermitianMatrix* constant = nullptr);
/// constant + complex_hessian(u), with the constant folded into the zero mode.
HermitianMatrixField complex_hessian(const ScalarField& u, const HermitianMatrix& constant);

/// Spectral d/d(axis). The Nyquist mode is zeroed.
ScalarField derivative(const ScalarField& u, int axis);
/// Spectral d^2/d(axis_a)d(axis_b). For a == b the Nyquist mode is kept.
ScalarField second_derivative(const ScalarField& u, int axis_a, int axis_b);

/// |grad u|_g^2 = g^{k\bar l} u_k u_{\bar l}.
ScalarField holomorphic_gradient_norm(const ScalarField& u);
ScalarField holomorphic_gradient_norm(const Spectrum& u_hat);

/// Unit-mass quadrature h^{2n} sum f, compensated, fixed summation order.
double integrate(const ScalarField& f);
double integrate(std::span<const double> values, const GridDomain& domain);
Complex integrate(std::span<const Complex> values, const GridDomain& domain);

/// Spectral interpolation onto a grid with the same n and metric but a different N.
/// Modes at or beyond the smaller grid's Nyquist frequency are dropped.
ScalarField resample(const ScalarField& u, DomainPtr target);

struct TrigMode {
  std::array<int, kMaxRealAxes> wavenumbers{};
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/// Sum over modes of c cos(2 pi m.x) + s sin(2 pi m.x).
ScalarField trig_polynomial(DomainPtr domain, std::span<const TrigMode> modes);

namespace detail {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

}  // namespace dhym
