#include "dhym/functionals.hpp"

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/LU>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;

// Inverse of the Vandermonde matrix on nodes 0..n, rows indexed by power; the
// top-left (n+1)x(n+1) block of entry n.
const Eigen::Matrix4d& vandermonde_inverse(int n) {
  static const std::array<Eigen::Matrix4d, kMaxComplexDim + 1> table = [] {
    std::array<Eigen::Matrix4d, kMaxComplexDim + 1> t{};
    for (int m = 1; m <= kMaxComplexDim; ++m) {
      Eigen::MatrixXd v(m + 1, m + 1);
      for (int r = 0; r <= m; ++r) {
        for (int c = 0; c <= m; ++c) v(r, c) = std::pow(static_cast<double>(r), c);
      }
      t[static_cast<std::size_t>(m)].setZero();
      t[static_cast<std::size_t>(m)].topLeftCorner(m + 1, m + 1) = v.fullPivLu().inverse();
    }
    return t;
  }();
  return table[static_cast<std::size_t>(n)];
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b = b * (n - k + j) / j;
  return b;
}

HermitianMatrix apply_metric_inverse(const HermitianMatrix& a, const HermitianMatrix& g) {
  if ((g - HermitianMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() == 0.0) return a;
  return g.inverse() * a;
}

std::array<Complex, kMaxComplexDim + 1> ratios_from_reduced(const HermitianMatrix& ga, const HermitianMatrix& gb) {
  // ga = g^{-1} A_c, gb = g^{-1} B_c.
  const auto n = static_cast<int>(ga.rows());
  std::array<Complex, kMaxComplexDim + 1> samples{};
  for (int s = 0; s <= n; ++s) {
    samples[static_cast<std::size_t>(s)] = detail::small_determinant(static_cast<double>(s) * ga + gb);
  }
  std::array<Complex, kMaxComplexDim + 1> out{};
  for (int i = 0; i <= n; ++i) {
    Complex c = 0.0;
    for (int s = 0; s <= n; ++s) {
      c += vandermonde_inverse(n)(i, s) * samples[static_cast<std::size_t>(s)];
    }
    out[static_cast<std::size_t>(i)] = c / binomial(n, i);
  }
  return out;
}

}  // namespace

namespace detail {

Complex small_determinant(const HermitianMatrix& m) {
  switch (m.rows()) {
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      throw InvalidArgument("small_determinant supports sizes 1..3");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------------

ClosedForm::ClosedForm(DomainPtr domain, HermitianMatrix constant_part)
    : ClosedForm(std::move(constant_part), ScalarField::constant(domain, 0.0)) {}

ClosedForm::ClosedForm(HermitianMatrix constant_part, ScalarField potential)
    : domain_(potential.domain_ptr()),
      constant_(std::move(constant_part)),
      potential_(std::move(potential)),
      realized_(domain_) {
  const int n = domain_->complex_dim();
  if (constant_.rows() != n || constant_.cols() != n) throw InvalidArgument("constant part has wrong size");
  if (!constant_.allFinite()) throw InvalidArgument("constant part is not finite");
  const double scale = std::max(1.0, constant_.cwiseAbs().maxCoeff());
  if ((constant_ - constant_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("constant part is not Hermitian");
  }
  constant_ = 0.5 * (constant_ + constant_.adjoint()).eval();
  if (!potential_.all_finite()) throw NonFinite("potential has non-finite values");
  for (double v : potential_.values()) {
    if (v != potential_[0]) {
      flat_potential_ = false;
      break;
    }
  }
  if (!flat_potential_) realized_ = complex_hessian(potential_);
  realized_.add_constant(constant_);
}

ClosedForm ClosedForm::shifted(const ScalarField& u) const { return ClosedForm(constant_, potential_ + u); }

HermitianMatrixField ClosedForm::realize_with(const ScalarField& u) const {
  if (!u.domain().compatible_with(*domain_)) throw InvalidArgument("realize_with: domain mismatch");
  if (flat_potential_) return complex_hessian(u, constant_);
  return complex_hessian(potential_ + u, constant_);
}

HermitianMatrixField ClosedForm::realize_with(const Spectrum& u_hat) const {
  if (!u_hat.domain_ptr()->compatible_with(*domain_)) throw InvalidArgument("realize_with: domain mismatch");
  if (flat_potential_) return complex_hessian(u_hat, &constant_);
  HermitianMatrixField out = complex_hessian(u_hat);
  out += realized_;
  return out;
}

Complex pointwise_top_wedge(const HermitianMatrix& a, const HermitianMatrix& g) {
  HermitianMatrix m = apply_metric_inverse(a, g);
  m.diagonal().array() += Complex(0.0, 1.0);
  return detail::small_determinant(m);
}

ComplexVolume complex_volume(const ClosedForm& chi) {
  const auto& d = chi.domain();
  const HermitianMatrix& g = d.metric();
  AlignedVector<Complex> values(d.total_points());
  for (std::size_t p = 0; p < values.size(); ++p) values[p] = pointwise_top_wedge(chi.at(p), g);
  ComplexVolume out;
  out.value = integrate(values, d);
  double arg = std::atan2(out.value.imag(), out.value.real());
  if (arg < 0.0) arg += 2.0 * kPi;
  out.theta0 = arg;
  out.cot_theta0 = out.value.real() / out.value.imag();
  return out;
}

ComplexVolume theta_zero(const ClosedForm& chi) {
  ComplexVolume out = complex_volume(chi);
  if (!(out.theta0 > 0.0 && out.theta0 < kPi) || out.value.imag() <= 0.0) {
    throw NotSupercritical("theta0 = " + std::to_string(out.theta0) + " is not in (0, pi)");
  }
  return out;
}

std::array<Complex, kMaxComplexDim + 1> mixed_wedge_ratios(const HermitianMatrix& a, const HermitianMatrix& b,
                                                           const HermitianMatrix& g) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n || g.rows() != n || n < 1 || n > kMaxComplexDim) {
    throw InvalidArgument("mixed_wedge_ratio: size mismatch");
  }
  HermitianMatrix ga = apply_metric_inverse(a, g);
  HermitianMatrix gb = apply_metric_inverse(b, g);
  ga.diagonal().array() += Complex(0.0, 1.0);
  gb.diagonal().array() += Complex(0.0, 1.0);
  return ratios_from_reduced(ga, gb);
}

Complex mixed_wedge_ratio(const HermitianMatrix& a, const HermitianMatrix& b, const HermitianMatrix& g, int i) {
  if (i < 0 || i > a.rows()) throw InvalidArgument("mixed_wedge_ratio: index out of range");
  return mixed_wedge_ratios(a, b, g)[static_cast<std::size_t>(i)];
}

Complex calabi_yau(const ScalarField& v, const HermitianMatrixField& chi_v, const ClosedForm& chi) {
  const auto& d = chi.domain();
  if (!v.domain().compatible_with(d) || !chi_v.domain().compatible_with(d)) {
    throw InvalidArgument("calabi_yau: domain mismatch");
  }
  const int n = d.complex_dim();
  const bool identity = d.metric_is_identity();
  const HermitianMatrix ginv = d.metric_inverse();
  const HermitianMatrixField& base = chi.realized();
  if (identity && n <= 2) {
    // Real and imaginary parts of the ratio sum, accumulated directly.
    const int last = n - 1;
    const auto a00 = chi_v.real_plane(0, 0);
    const auto a11 = chi_v.real_plane(last, last);
    const auto a01r = chi_v.real_plane(0, last);
    const auto a01i = chi_v.imag_plane(0, last);
    const auto b00 = base.real_plane(0, 0);
    const auto b11 = base.real_plane(last, last);
    const auto b01r = base.real_plane(0, last);
    const auto b01i = base.imag_plane(0, last);
    detail::CompensatedSum re;
    detail::CompensatedSum im;
    for (std::size_t p = 0; p < d.total_points(); ++p) {
      const double vp = v[p];
      if (vp == 0.0) continue;
      double sr;
      double si;
      if (n == 1) {
        // ratios: b_c (i = 0) and a_c (i = 1)
        sr = a00[p] + b00[p];
        si = 2.0;
      } else {
        const double x0 = a00[p], x1 = a11[p], y0 = b00[p], y1 = b11[p];
        const double xa = a01r[p] * a01r[p] + a01i[p] * a01i[p];
        const double yb = b01r[p] * b01r[p] + b01i[p] * b01i[p];
        const double cross = a01r[p] * b01r[p] + a01i[p] * b01i[p];
        // det_a + det_b + (a00 b11 + a11 b00 - 2 Re(a01 conj b01)) / 2, with i added on the diagonals.
        sr = (x0 * x1 - 1.0 - xa) + (y0 * y1 - 1.0 - yb) + 0.5 * (x0 * y1 + x1 * y0 - 2.0 - 2.0 * cross);
        si = 1.5 * (x0 + x1 + y0 + y1);
      }
      re.add(vp * sr);
      im.add(vp * si);
    }
    return Complex(re.value(), im.value()) * d.cell_weight() / static_cast<double>(n + 1);
  }
  AlignedVector<Complex> integrand(d.total_points());
  const Complex I(0.0, 1.0);
  for (std::size_t p = 0; p < integrand.size(); ++p) {
    if (v[p] == 0.0) {
      integrand[p] = 0.0;
      continue;
    }
    HermitianMatrix ga = chi_v.at(p);
    HermitianMatrix gb = base.at(p);
    if (!identity) {
      ga = (ginv * ga).eval();
      gb = (ginv * gb).eval();
    }
    ga.diagonal().array() += I;
    gb.diagonal().array() += I;
    const auto r = ratios_from_reduced(ga, gb);
    Complex sum = 0.0;
    for (int i = 0; i <= n; ++i) sum += r[static_cast<std::size_t>(i)];
    integrand[p] = v[p] * sum;
  }
  return integrate(integrand, d) / static_cast<double>(n + 1);
}

Complex calabi_yau(const ScalarField& v, const ClosedForm& chi) {
  return calabi_yau(v, chi.realize_with(v), chi);
}

double im_cy(const ScalarField& v, const ClosedForm& chi) { return calabi_yau(v, chi).imag(); }

}  // namespace dhym
