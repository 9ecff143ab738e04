#pragma once

// Reference computations used to validate the engine. Nothing here depends on
// the flow module; spectra come from characteristic polynomials, mixed
// determinants from permutation sums, derivatives from finite differences.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "dhym/functionals.hpp"

namespace dhym::oracles {

// ---------------------------------------------------------------------------------
// Pointwise algebra

/// Roots of det(A - lambda g) = 0, sorted descending. Coefficients by
/// Faddeev-LeVerrier on g^{-1/2} A g^{-1/2}, roots from the companion matrix.
RealVector char_poly_eigenvalues(const HermitianMatrix& a, const HermitianMatrix& g);

/// Mixed determinant D(M_1, ..., M_n) = (1/n!) sum over pairs of permutations
/// sgn(s) sgn(t) prod_k (M_k)_{s(k) t(k)}. D(M, ..., M) = det M.
Complex mixed_determinant(std::span<const HermitianMatrix> mats);
/// Same for general complex matrices.
Complex mixed_determinant(std::span<const Eigen::MatrixXcd> mats);

/// D(A_c, ..., A_c, B_c, ..., B_c) with i copies of g^{-1}(A + i g) and n - i of
/// g^{-1}(B + i g).
Complex mixed_wedge_ratio_bruteforce(const HermitianMatrix& a, const HermitianMatrix& b, const HermitianMatrix& g,
                                     int i);

/// cot theta and F from char_poly_eigenvalues and a dense inverse.
struct BruteSpectrum {
  RealVector lambda;
  double cot_theta = 0.0;
  HermitianMatrix F;
};
BruteSpectrum brute_spectrum(const HermitianMatrix& w, const HermitianMatrix& g);

// ---------------------------------------------------------------------------------
// Grid operators

/// Complex Hessian from fourth-order central differences (periodic wrap).
HermitianMatrixField fd_complex_hessian(const ScalarField& u);

/// Sum of random trigonometric modes with |m_a| <= max_wavenumber, coefficient
/// magnitudes up to `amplitude`, drawn from a seeded mt19937_64.
ScalarField random_band_limited(DomainPtr domain, int max_wavenumber, int modes, double amplitude,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------------
// Linearization

struct LinearizationCheck {
  std::vector<double> s;
  std::vector<double> max_error;  ///< max over grid of |FD quotient - F^{ij} v_ij|
  double slope = 0.0;             ///< least-squares slope of log error against log s
  bool pass = false;              ///< |slope - 2| <= 0.1
};

/// Compares (cot theta(chi_{u+sv}) - cot theta(chi_{u-sv})) / (2s) with
/// F^{i\bar j} v_{i\bar j} pointwise. Throws PhaseSingular if theta leaves (0, pi).
LinearizationCheck fd_linearization_check(const ScalarField& u, const ScalarField& v, const ClosedForm& chi,
                                          std::span<const double> s_list);

// ---------------------------------------------------------------------------------
// Linear flow in one complex dimension

/// n = 1, chi_{1\bar 1} = 1 + a cos(2 pi x_1), u(0) = 0. The flow is
/// u_t = a cos(2 pi x_1) + u_{1\bar 1}, so u(t) = A(t) cos(2 pi x_1) with
/// A(t) = (a / pi^2)(1 - e^{-pi^2 t}).
struct HeatFlowOracle {
  double a = 0.0;
  int points_per_axis = 0;

  DomainPtr domain() const;
  /// chi = 1 + dd^c phi with phi = -(a / pi^2) cos(2 pi x_1).
  ClosedForm chi() const;
  double amplitude(double t) const;
  ScalarField solution(double t) const;
  /// Rate of the mode-1 term and of osc(u_t).
  double decay_rate() const;
  double theta0() const;
};

/// Throws InvalidArgument unless |a| < 1.
HeatFlowOracle heat_flow_oracle(double a, int points_per_axis);

// ---------------------------------------------------------------------------------
// Refinement

struct RefinementSample {
  int points_per_axis = 0;
  double theta0 = 0.0;
  double im_cy_drift = 0.0;
  ScalarField final_u;
};

struct RefinementRow {
  int points_per_axis = 0;
  double theta0 = 0.0;
  double theta0_error = 0.0;  ///< |theta0 - theta0 on the finest grid|
  double im_cy_drift = 0.0;
  double state_error = 0.0;   ///< mean-removed sup distance to the finest state, resampled
};

struct RefinementTable {
  std::vector<RefinementRow> rows;
  bool theta0_monotone = true;
  bool drift_monotone = true;
  bool state_monotone = true;
};

/// Runs `scenario` at every N (ascending) and compares against the finest.
RefinementTable refinement_study(const std::function<RefinementSample(int)>& scenario,
                                 std::span<const int> points_per_axis);

// ---------------------------------------------------------------------------------
// Sampling the cone

/// Eigenvalue vector with every arccot angle drawn uniformly from (margin, pi - margin),
/// rejected until theta(lambda) < tau.
struct ConeSampler {
  ConeSampler(int n, double tau, std::uint64_t seed, double margin = 1e-3);
  RealVector next();
  std::size_t drawn() const { return drawn_; }

 private:
  int n_;
  double tau_;
  double margin_;
  std::mt19937_64 rng_;
  std::size_t drawn_ = 0;
};

struct ConcavityReport {
  std::size_t samples = 0;
  std::size_t drawn = 0;
  double max_eigenvalue = 0.0;  ///< largest eigenvalue of the cot theta Hessian seen
  std::size_t violations = 0;   ///< max eigenvalue above 1e-9
  double max_fd_error = 0.0;    ///< relative mismatch with second differences of cot theta
};

ConcavityReport concavity_sampler(int n, double tau, std::size_t count, std::uint64_t seed);

struct ConeReport {
  std::size_t samples = 0;
  std::size_t violations = 0;            ///< structural inequalities below -1e-9
  double worst_margin = 0.0;
  std::size_t convexity_violations = 0;  ///< theta(t a + (1-t) b) >= tau + 1e-12
};

ConeReport cone_inequality_sampler(int n, double tau, std::size_t count, std::uint64_t seed);

}  // namespace dhym::oracles
