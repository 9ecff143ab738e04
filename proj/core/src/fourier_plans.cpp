#include "fourier_plans.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "dhym/errors.hpp"

namespace dhym::detail {

namespace {

// The FFTW planner is not reentrant; execution of an existing plan is.
// Never destroyed: plans owned by static objects are torn down after function statics.
std::mutex& planner_mutex() {
  static auto* m = new std::mutex;
  return *m;
}

}  // namespace

FourierPlans::FourierPlans(int rank, int points_per_axis) : rank_(rank), n_(points_per_axis) {
  real_size_ = 1;
  for (int a = 0; a < rank; ++a) real_size_ *= static_cast<std::size_t>(n_);
  complex_size_ = real_size_ / static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ / 2 + 1);

  wavenumbers_.resize(complex_size_ * static_cast<std::size_t>(rank_));
  std::vector<int> idx(static_cast<std::size_t>(rank_), 0);
  const int last_extent = n_ / 2 + 1;
  for (std::size_t k = 0; k < complex_size_; ++k) {
    for (int a = 0; a < rank_; ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      const int m = (a == rank_ - 1) ? i : (i <= n_ / 2 ? i : i - n_);
      wavenumbers_[k * static_cast<std::size_t>(rank_) + static_cast<std::size_t>(a)] = static_cast<std::int16_t>(m);
    }
    for (int a = rank_ - 1; a >= 0; --a) {
      const int extent = (a == rank_ - 1) ? last_extent : n_;
      if (++idx[static_cast<std::size_t>(a)] < extent) break;
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }

  std::vector<int> dims(static_cast<std::size_t>(rank_), n_);
  double* real_buf = fftw_alloc_real(real_size_);
  fftw_complex* cplx_buf = fftw_alloc_complex(complex_size_);
  {
    std::lock_guard lock(planner_mutex());
    // ESTIMATE keeps the chosen algorithm, and so every rounding pattern, fixed from
    // run to run.
    forward_plan_ = fftw_plan_dft_r2c(rank_, dims.data(), real_buf, cplx_buf, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    inverse_plan_ = fftw_plan_dft_c2r(rank_, dims.data(), cplx_buf, real_buf, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  }
  fftw_free(real_buf);
  fftw_free(cplx_buf);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw Error("FFTW failed to create plans");
  }
}

FourierPlans::~FourierPlans() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

namespace {

// The plans were made for SIMD-aligned arrays; misaligned callers go through a copy.
bool aligned(const void* p) { return fftw_alignment_of(static_cast<double*>(const_cast<void*>(p))) == 0; }

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

void FourierPlans::forward(const double* in, std::complex<double>* out) const {
  if (!aligned(in) || !aligned(out)) {
    std::unique_ptr<double, FftwDeleter> a(fftw_alloc_real(real_size_));
    std::unique_ptr<fftw_complex, FftwDeleter> b(fftw_alloc_complex(complex_size_));
    std::copy(in, in + real_size_, a.get());
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), a.get(), b.get());
    std::copy_n(reinterpret_cast<const std::complex<double>*>(b.get()), complex_size_, out);
    return;
  }
  // PRESERVE_INPUT: the const_cast never results in a write.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void FourierPlans::inverse(std::complex<double>* in, double* out, bool normalize) const {
  if (!aligned(in) || !aligned(out)) {
    std::unique_ptr<fftw_complex, FftwDeleter> a(fftw_alloc_complex(complex_size_));
    std::unique_ptr<double, FftwDeleter> b(fftw_alloc_real(real_size_));
    std::copy_n(in, complex_size_, reinterpret_cast<std::complex<double>*>(a.get()));
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), a.get(), b.get());
    std::copy(b.get(), b.get() + real_size_, out);
  } else {
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in), out);
  }
  if (!normalize) return;
  const double scale = 1.0 / static_cast<double>(real_size_);
  for (std::size_t i = 0; i < real_size_; ++i) out[i] *= scale;
}

const std::vector<std::vector<double>>& FourierPlans::half_gradient_symbols() const {
  std::call_once(gradient_once_, [this] {
    const int nyquist = n_ / 2;
    for (int a = 0; a < rank_; ++a) {
      std::vector<double> sym(complex_size_);
      for (std::size_t k = 0; k < complex_size_; ++k) {
        const int m = wavenumbers(k)[a];
        sym[k] = (m == nyquist || m == -nyquist) ? 0.0 : std::numbers::pi * m;
      }
      gradient_symbols_.push_back(std::move(sym));
    }
  });
  return gradient_symbols_;
}

const std::vector<std::vector<double>>& FourierPlans::hessian_symbols() const {
  std::call_once(symbols_once_, [this] {
    const int n = rank_ / 2;
    const double c = -std::numbers::pi * std::numbers::pi / static_cast<double>(real_size_);
    const int nyquist = n_ / 2;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        std::vector<double> re(complex_size_);
        std::vector<double> im(i == j ? 0 : complex_size_);
        for (std::size_t k = 0; k < complex_size_; ++k) {
          const std::int16_t* m = wavenumbers(k);
          if (i == j) {
            const double mx = m[2 * i];
            const double my = m[2 * i + 1];
            re[k] = c * (mx * mx + my * my);
            continue;
          }
          // Mixed second derivatives drop the Nyquist mode.
          auto mixed = [&](int a) { return (m[a] == nyquist || m[a] == -nyquist) ? 0.0 : static_cast<double>(m[a]); };
          const double xi = mixed(2 * i);
          const double yi = mixed(2 * i + 1);
          const double xj = mixed(2 * j);
          const double yj = mixed(2 * j + 1);
          re[k] = c * (xi * xj + yi * yj);
          im[k] = c * (xi * yj - yi * xj);
        }
        hessian_symbols_.push_back(std::move(re));
        if (i != j) hessian_symbols_.push_back(std::move(im));
      }
    }
  });
  return hessian_symbols_;
}

std::ptrdiff_t FourierPlans::index_of(const int* m) const {
  std::ptrdiff_t k = 0;
  for (int a = 0; a < rank_; ++a) {
    const int w = m[a];
    int i;
    int extent;
    if (a == rank_ - 1) {
      if (w < 0 || w > n_ / 2) return -1;
      i = w;
      extent = n_ / 2 + 1;
    } else {
      if (w < -n_ / 2 || w > n_ / 2) return -1;
      i = w >= 0 ? w : w + n_;
      extent = n_;
    }
    k = k * extent + i;
  }
  return k;
}

std::shared_ptr<const FourierPlans> plans_for(int rank, int points_per_axis) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::weak_ptr<const FourierPlans>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{rank, points_per_axis}];
  if (auto existing = slot.lock()) return existing;
  auto created = std::make_shared<const FourierPlans>(rank, points_per_axis);
  slot = created;
  return created;
}

}  // namespace dhym::detail
