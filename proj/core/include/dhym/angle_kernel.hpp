#pragma once

// Pointwise algebra of the Lagrangian phase operator
//   theta(lambda) = sum_i arccot(lambda_i),   arccot valued in (0, pi),
// where lambda are the eigenvalues of a Hermitian form w relative to a metric g.

#include <array>
#include <span>

#include "dhym/lattice.hpp"

namespace dhym {

inline constexpr double kDefaultThetaGuard = 1e-8;

inline std::span<const double> view(const RealVector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct PointSpectrum {
  RealVector lambda;  ///< descending
  double theta = 0.0;
  double cot_theta = 0.0;
  double csc2_theta = 0.0;
  HermitianMatrix F;  ///< csc^2(theta) (w g^{-1} w + g)^{-1}
};

/// The cone Gamma_tau = { lambda : theta(lambda) < tau }, 0 < tau < pi.
class ConeParams {
 public:
  explicit ConeParams(double tau);
  double tau() const { return tau_; }

 private:
  double tau_;
};

/// pi/2 - atan(x), in (0, pi) and strictly decreasing.
double arccot(double x);

/// Eigenvalues of A v = lambda g v, sorted descending. Closed form for n <= 2,
/// cyclic complex Jacobi for n = 3.
RealVector eigenvalues_descending(const HermitianMatrix& a, const HermitianMatrix& g);
/// Standard Hermitian problem (g = I).
RealVector eigenvalues_descending(const HermitianMatrix& a);

struct EigenDecomposition {
  RealVector values;      ///< descending
  HermitianMatrix vectors;  ///< column k solves A v = lambda_k g v, with v^* g v = 1
  double residual = 0.0;  ///< max_k |A v_k - lambda_k g v_k|
};

/// Jacobi eigen-decomposition with an explicit residual check; throws
/// EigenSolveError when the residual exceeds 1e-10 (relative to the data scale).
EigenDecomposition eigen_decompose(const HermitianMatrix& a, const HermitianMatrix& g);

double theta_of(std::span<const double> lambda);

/// prod_j (lambda_j + i). Its argument is theta(lambda) modulo 2 pi.
Complex phase_product(std::span<const double> lambda);

/// Re prod(lambda_j + i) / Im prod(lambda_j + i). Throws PhaseSingular when
/// |sin theta| < sin(theta_guard).
double cot_theta(std::span<const double> lambda, double theta_guard = kDefaultThetaGuard);

/// F = csc^2(theta) (w g^{-1} w + g)^{-1}. Throws PhaseSingular unless
/// theta_guard < theta < pi - theta_guard.
HermitianMatrix linearization_matrix(const HermitianMatrix& w, const HermitianMatrix& g, double theta,
                                     double theta_guard = kDefaultThetaGuard);

/// tr(F V) = F^{i\bar j} V_{i\bar j}: the directional derivative of cot theta along V.
double contract(const HermitianMatrix& f, const HermitianMatrix& v);

bool in_gamma_tau(std::span<const double> lambda, const ConeParams& cone);

struct StructuralReport {
  bool precondition_ok = true;  ///< theta(lambda) <= tau
  bool pass = false;
  /// lambda_{n-1} - cot(tau/2),  lambda_{n-1} - |lambda_n|,  lambda_1 + (n-1) lambda_n
  std::array<double, 3> margins{};
};

/// Checks the eigenvalue inequalities implied by theta(lambda) <= tau < pi.
/// Sorts its own copy of lambda. For n = 1 both conditions are vacuous.
StructuralReport structural_inequalities(std::span<const double> lambda, double tau);

/// Hessian of lambda -> cot theta(lambda).
RealMatrix cot_theta_hessian(std::span<const double> lambda, double theta_guard = kDefaultThetaGuard);

/// Full per-point data of w relative to g. Throws PhaseSingular unless
/// theta_guard < theta < pi - theta_guard.
PointSpectrum point_spectrum(const HermitianMatrix& w, const HermitianMatrix& g,
                             double theta_guard = kDefaultThetaGuard);

}  // namespace dhym
