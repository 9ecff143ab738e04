#pragma once

// Certification of initial data: the subsolution constants A0, B0 and the
// parabolic-subsolution constants delta, K.

#include <cstdint>
#include <span>
#include <vector>

#include "dhym/functionals.hpp"

namespace dhym {

struct SubsolutionCertificate {
  double A0 = 0.0;
  double B0 = 0.0;
  double theta0 = 0.0;
  bool passes = false;
  double delta = 0.0;
  double K = 0.0;
  double margin_A = 0.0;  ///< theta0 - A0
  double margin_B = 0.0;  ///< pi - B0
  double theta_min = 0.0;  ///< min over the grid of theta(chi_u)
  double lambda_abs_max = 0.0;  ///< max over the grid of |lambda(chi_u)|
};

/// max over grid and j of sum_{i != j} arccot lambda_i.
double compute_A0(const ClosedForm& chi_u);
/// max over grid of theta(chi_u).
double compute_B0(const ClosedForm& chi_u);
/// min over grid of theta(chi_u).
double compute_theta_min(const ClosedForm& chi_u);

/// A0 for a single eigenvalue vector (explicit loop over j).
double A0_of(std::span<const double> lambda);

/// delta = min{(pi - B0)/(2n), (theta0 - A0)/(2(n+2))} and
/// K = 2n(delta + max|lambda| + cot theta0 - cot((pi + B0)/2) + cot(n(theta0 - A0)/(2(n+1)))).
/// Failure is reported through `passes`, never thrown.
SubsolutionCertificate certify(const ClosedForm& chi_u, double theta0);
/// Same constants from precomputed grid extrema.
SubsolutionCertificate certify_from(int n, double A0, double B0, double theta_min, double lambda_abs_max,
                                    double theta0);

struct SamplingReport {
  std::size_t drawn = 0;
  std::size_t kept = 0;            ///< members of S_delta
  std::size_t excluded_phase = 0;  ///< theta(lambda + mu) outside (0, pi)
  std::size_t excluded_tau = 0;    ///< tau <= -delta
  std::size_t violations = 0;      ///< |mu| + |tau| > K
  double max_radius = 0.0;         ///< largest |mu|_2 + |tau| among kept samples
  std::vector<double> first_violation;  ///< (mu_1, ..., mu_n, tau)
};

/// Monte-Carlo membership test of S_delta at a point with eigenvalues lambda and
/// a time-independent subsolution: mu_i ~ U(-delta, -delta + s) with s cycling
/// through {2K, 1, 0.1}, tau = cot theta0 - cot theta(lambda + mu).
SamplingReport sample_S_delta(std::span<const double> lambda, double theta0, double delta, double K,
                              std::size_t count, std::uint64_t seed);

}  // namespace dhym
