#pragma once

// Global complex integrals over the torus: the total complex volume Z and its
// phase theta0, mixed wedge ratios, and the Calabi-Yau functional.

#include <array>

#include "dhym/lattice.hpp"

namespace dhym {

/// chi(x) = C + complex_hessian(phi)(x). The realized matrix field is computed once
/// at construction.
class ClosedForm {
 public:
  /// Constant form, phi = 0.
  ClosedForm(DomainPtr domain, HermitianMatrix constant_part);
  ClosedForm(HermitianMatrix constant_part, ScalarField potential);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  const HermitianMatrix& constant_part() const { return constant_; }
  const ScalarField& potential() const { return potential_; }
  const HermitianMatrixField& realized() const { return realized_; }
  HermitianMatrix at(std::size_t point) const { return realized_.at(point); }

  /// chi_u = chi + sqrt(-1) d dbar u, i.e. the same constant part with potential phi + u.
  ClosedForm shifted(const ScalarField& u) const;
  /// The realized field of shifted(u), without building the intermediate form.
  HermitianMatrixField realize_with(const ScalarField& u) const;
  /// Same, from the Fourier coefficients of u.
  HermitianMatrixField realize_with(const Spectrum& u_hat) const;

 private:
  DomainPtr domain_;
  HermitianMatrix constant_;
  ScalarField potential_;
  HermitianMatrixField realized_;
  bool flat_potential_ = true;
};

struct ComplexVolume {
  Complex value;          ///< Z = int det(g^{-1} w + i I) dV
  double theta0 = 0.0;    ///< Arg Z in [0, 2 pi)
  double cot_theta0 = 0.0;  ///< Re Z / Im Z
};

/// det(g^{-1} A + i I) = prod_j (lambda_j + i).
Complex pointwise_top_wedge(const HermitianMatrix& a, const HermitianMatrix& g);

/// Z and its argument. Never throws on the value of theta0.
ComplexVolume complex_volume(const ClosedForm& chi);
/// As complex_volume, but throws NotSupercritical unless theta0 lies in (0, pi).
ComplexVolume theta_zero(const ClosedForm& chi);

/// Pointwise (A_c)^i ^ (B_c)^{n-i} / omega^n with A_c = A + i g, B_c = B + i g: the
/// s^i coefficient of det(g^{-1}(s A_c + B_c)) divided by binom(n, i).
Complex mixed_wedge_ratio(const HermitianMatrix& a, const HermitianMatrix& b, const HermitianMatrix& g, int i);
/// All n + 1 ratios at once (entries past n are zero).
std::array<Complex, kMaxComplexDim + 1> mixed_wedge_ratios(const HermitianMatrix& a, const HermitianMatrix& b,
                                                           const HermitianMatrix& g);

/// CY(v) = 1/(n+1) sum_i int v (chi_v + i omega)^i ^ (chi + i omega)^{n-i} / omega^n.
Complex calabi_yau(const ScalarField& v, const ClosedForm& chi);
/// Same, with the realized field of chi_v supplied by the caller.
Complex calabi_yau(const ScalarField& v, const HermitianMatrixField& chi_v, const ClosedForm& chi);
double im_cy(const ScalarField& v, const ClosedForm& chi);

namespace detail {
/// Determinant of a 1x1, 2x2 or 3x3 complex matrix by cofactor expansion.
Complex small_determinant(const HermitianMatrix& m);
}  // namespace detail

}  // namespace dhym
