#pragma once

// Seeded generators for property tests. SplitMix64 gives the same stream on every
// standard library, so a failing case is reproducible from its printed seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "dhym/angle_kernel.hpp"
#include "dhym/lattice.hpp"

namespace dhym::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// Inclusive range.
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  Complex complex(double r) { return {uniform(-r, r), uniform(-r, r)}; }

 private:
  std::uint64_t state_;
};

inline HermitianMatrix hermitian(Gen& g, int n, double scale) {
  HermitianMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = Complex(g.uniform(-scale, scale), 0.0);
    for (int j = i + 1; j < n; ++j) {
      m(i, j) = g.complex(scale);
      m(j, i) = std::conj(m(i, j));
    }
  }
  return m;
}

/// B B^* + I/2, well conditioned and Hermitian to the last bit.
inline HermitianMatrix positive_metric(Gen& g, int n) {
  HermitianMatrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = g.complex(0.6);
  HermitianMatrix m = b * b.adjoint();
  for (int i = 0; i < n; ++i) m(i, i) += 0.5;
  for (int i = 0; i < n; ++i) {
    m(i, i) = Complex(m(i, i).real(), 0.0);
    for (int j = i + 1; j < n; ++j) m(j, i) = std::conj(m(i, j));
  }
  return m;
}

/// Eigenvalue vector with theta(lambda) < tau, every angle at least `margin` from 0 and pi.
inline RealVector cone_point(Gen& g, int n, double tau, double margin = 0.05) {
  RealVector lambda(n);
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double phi = g.uniform(margin, std::numbers::pi - margin);
      sum += phi;
      lambda(i) = 1.0 / std::tan(phi);
    }
    if (sum < tau) return lambda;
  }
}

/// Runs `body` on `cases` independent generators derived from `seed`.
template <class Body>
void for_all(std::uint64_t seed, int cases, Body&& body) {
  Gen root(seed);
  for (int c = 0; c < cases; ++c) {
    const std::uint64_t case_seed = root.next();
    SCOPED_TRACE("case " + std::to_string(c) + " seed " + std::to_string(case_seed));
    Gen g(case_seed);
    body(g);
    if (::testing::Test::HasFatalFailure()) return;
  }
}

inline double max_abs_difference(const HermitianMatrixField& a, const HermitianMatrixField& b) {
  double worst = 0.0;
  const int n = a.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (std::size_t p = 0; p < a.size(); ++p) {
        worst = std::max(worst, std::abs(a.real_plane(i, j)[p] - b.real_plane(i, j)[p]));
        worst = std::max(worst, std::abs(a.imag_plane(i, j)[p] - b.imag_plane(i, j)[p]));
      }
    }
  }
  return worst;
}

}  // namespace dhym::testing
