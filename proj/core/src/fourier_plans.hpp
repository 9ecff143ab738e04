#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

namespace dhym::detail {

/// FFTW plans for one grid shape (rank 2n, N points per axis). Plans are created
/// and destroyed under a global planner lock; execution goes through the
/// new-array interface, which is safe from concurrent threads.
class FourierPlans {
 public:
  FourierPlans(int rank, int points_per_axis);
  ~FourierPlans();
  FourierPlans(const FourierPlans&) = delete;
  FourierPlans& operator=(const FourierPlans&) = delete;

  int rank() const { return rank_; }
  int points_per_axis() const { return n_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }
  const std::int16_t* wavenumbers(std::size_t k) const { return &wavenumbers_[k * static_cast<std::size_t>(rank_)]; }

  void forward(const double* in, std::complex<double>* out) const;
  /// Inverse transform, divided by the point count unless `normalize` is false;
  /// destroys `in`.
  void inverse(std::complex<double>* in, double* out, bool normalize = true) const;

  /// Multipliers for u -> u_{i\bar j}, already divided by the point count. One
  /// table per real plane, ordered as: for i <= j, the real part, then (i < j) the
  /// imaginary part. Built on first use.
  const std::vector<std::vector<double>>& hessian_symbols() const;
  /// Multipliers for u -> (1/2) du/d(axis) with the Nyquist mode zeroed, one table
  /// per real axis, not normalized. Built on first use.
  const std::vector<std::vector<double>>& half_gradient_symbols() const;

  /// Flat index in the half-complex layout of a wavenumber vector, or -1 when the
  /// vector is not representable (|m| > N/2, or negative last-axis wavenumber).
  std::ptrdiff_t index_of(const int* m) const;

 private:
  int rank_;
  int n_;
  std::size_t real_size_;
  std::size_t complex_size_;
  std::vector<std::int16_t> wavenumbers_;
  void* forward_plan_;
  void* inverse_plan_;
  mutable std::once_flag symbols_once_;
  mutable std::vector<std::vector<double>> hessian_symbols_;
  mutable std::once_flag gradient_once_;
  mutable std::vector<std::vector<double>> gradient_symbols_;
};

/// Shared plans for a shape; cached while any domain references them.
std::shared_ptr<const FourierPlans> plans_for(int rank, int points_per_axis);

}  // namespace dhym::detail
