#include "dhym/angle_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "dhym/errors.hpp"

namespace dhym {

namespace {

constexpr double kPi = std::numbers::pi;

void check_square(const HermitianMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > kMaxComplexDim) {
    throw InvalidArgument(std::string(what) + " must be square of size 1..3");
  }
}

// Cyclic Jacobi on a Hermitian matrix. On return `a` is diagonal and, when `v`
// is non-null, v holds the accumulated unitary transform.
void jacobi_hermitian(HermitianMatrix& a, HermitianMatrix* v) {
  const int n = static_cast<int>(a.rows());
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
      total += std::norm(a(p, p));
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    }
    total += 2.0 * off;
    if (off <= eps * eps * total || off == 0.0) return;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double beta = std::abs(a(p, q));
        if (beta == 0.0) continue;
        const Complex phase = a(p, q) / beta;
        const double alpha = a(p, p).real();
        const double gamma = a(q, q).real();
        const double tau = (gamma - alpha) / (2.0 * beta);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // J = D P with D = diag(1, conj(phase)) making the (p,q) entry real and P
        // the real rotation annihilating it.
        HermitianMatrix j = HermitianMatrix::Identity(n, n);
        j(p, p) = c;
        j(p, q) = s;
        j(q, p) = -s * std::conj(phase);
        j(q, q) = c * std::conj(phase);
        a = (j.adjoint() * a * j).eval();
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) a(k, k) = a(k, k).real();
        if (v != nullptr) *v = (*v * j).eval();
      }
    }
  }
  throw EigenSolveError("Jacobi iteration did not converge");
}

RealVector sorted_descending(RealVector v) {
  std::stable_sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

// L^{-1} A L^{-*} for the Cholesky factor of g.
HermitianMatrix reduce_to_standard(const HermitianMatrix& a, const HermitianMatrix& g) {
  Eigen::LLT<HermitianMatrix> llt(g);
  if (llt.info() != Eigen::Success) throw InvalidArgument("metric is not positive definite");
  const HermitianMatrix l = llt.matrixL();
  HermitianMatrix tmp = l.triangularView<Eigen::Lower>().solve(a);
  HermitianMatrix b = l.triangularView<Eigen::Lower>().solve(tmp.adjoint()).adjoint();
  return 0.5 * (b + b.adjoint());
}

}  // namespace

ConeParams::ConeParams(double tau) : tau_(tau) {
  if (!(tau > 0.0 && tau < kPi)) throw InvalidArgument("cone parameter tau must lie in (0, pi)");
}

double arccot(double x) { return 0.5 * kPi - std::atan(x); }

RealVector eigenvalues_descending(const HermitianMatrix& a) {
  check_square(a, "matrix");
  const auto n = a.rows();
  RealVector out(n);
  if (n == 1) {
    out(0) = a(0, 0).real();
    return out;
  }
  if (n == 2) {
    const double p = a(0, 0).real();
    const double q = a(1, 1).real();
    const double mean = 0.5 * (p + q);
    const double radius = std::hypot(0.5 * (p - q), std::abs(0.5 * (a(0, 1) + std::conj(a(1, 0)))));
    out(0) = mean + radius;
    out(1) = mean - radius;
    return out;
  }
  HermitianMatrix work = 0.5 * (a + a.adjoint());
  jacobi_hermitian(work, nullptr);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = work(i, i).real();
  return sorted_descending(out);
}

RealVector eigenvalues_descending(const HermitianMatrix& a, const HermitianMatrix& g) {
  check_square(a, "matrix");
  check_square(g, "metric");
  if (a.rows() != g.rows()) throw InvalidArgument("matrix and metric sizes differ");
  if ((g - HermitianMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() == 0.0) {
    return eigenvalues_descending(a);
  }
  return eigenvalues_descending(reduce_to_standard(a, g));
}

EigenDecomposition eigen_decompose(const HermitianMatrix& a, const HermitianMatrix& g) {
  check_square(a, "matrix");
  check_square(g, "metric");
  const auto n = a.rows();
  if (g.rows() != n) throw InvalidArgument("matrix and metric sizes differ");
  Eigen::LLT<HermitianMatrix> llt(g);
  if (llt.info() != Eigen::Success) throw InvalidArgument("metric is not positive definite");
  const HermitianMatrix l = llt.matrixL();

  HermitianMatrix b = reduce_to_standard(a, g);
  HermitianMatrix q = HermitianMatrix::Identity(n, n);
  if (n > 1) jacobi_hermitian(b, &q);

  std::array<int, kMaxComplexDim> order{0, 1, 2};
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int x, int y) { return b(x, x).real() > b(y, y).real(); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  // Columns of L^{-*} Q solve the generalized problem and are g-orthonormal.
  const HermitianMatrix v = l.adjoint().triangularView<Eigen::Upper>().solve(q);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = b(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }

  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < n; ++k) {
    scale = std::max(scale, std::abs(out.values(k)) * g.cwiseAbs().maxCoeff());
    const double r = (a * out.vectors.col(k) - out.values(k) * (g * out.vectors.col(k))).norm();
    out.residual = std::max(out.residual, r);
  }
  if (!(out.residual <= 1e-10 * scale)) {
    throw EigenSolveError("eigen residual " + std::to_string(out.residual) + " exceeds tolerance");
  }
  return out;
}

double theta_of(std::span<const double> lambda) {
  double theta = 0.0;
  for (double l : lambda) theta += arccot(l);
  return theta;
}

Complex phase_product(std::span<const double> lambda) {
  Complex p(1.0, 0.0);
  for (double l : lambda) p *= Complex(l, 1.0);
  return p;
}

double cot_theta(std::span<const double> lambda, double theta_guard) {
  const Complex p = phase_product(lambda);
  const double s = std::sin(theta_guard);
  if (!(p.imag() * p.imag() >= s * s * std::norm(p))) {
    throw PhaseSingular("|sin theta| below guard; theta = " + std::to_string(theta_of(lambda)));
  }
  return p.real() / p.imag();
}

HermitianMatrix linearization_matrix(const HermitianMatrix& w, const HermitianMatrix& g, double theta,
                                     double theta_guard) {
  check_square(w, "matrix");
  check_square(g, "metric");
  if (!(theta > theta_guard && theta < kPi - theta_guard)) {
    throw PhaseSingular("theta = " + std::to_string(theta) + " outside the admissible range (0, pi)");
  }
  const double s = std::sin(theta);
  const double csc2 = 1.0 / (s * s);
  Eigen::LLT<HermitianMatrix> g_llt(g);
  if (g_llt.info() != Eigen::Success) throw InvalidArgument("metric is not positive definite");
  HermitianMatrix m = w * g_llt.solve(w) + g;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::LLT<HermitianMatrix> m_llt(m);
  HermitianMatrix f = csc2 * m_llt.solve(HermitianMatrix::Identity(w.rows(), w.cols()));
  return 0.5 * (f + f.adjoint());
}

double contract(const HermitianMatrix& f, const HermitianMatrix& v) {
  return (f.transpose().cwiseProduct(v)).sum().real();
}

bool in_gamma_tau(std::span<const double> lambda, const ConeParams& cone) { return theta_of(lambda) < cone.tau(); }

StructuralReport structural_inequalities(std::span<const double> lambda, double tau) {
  StructuralReport report;
  std::vector<double> l(lambda.begin(), lambda.end());
  std::stable_sort(l.begin(), l.end(), std::greater<double>());
  const std::size_t n = l.size();
  if (theta_of(l) > tau) {
    report.precondition_ok = false;
    report.pass = false;
    return report;
  }
  if (n < 2) {
    report.margins = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
    report.pass = true;
    return report;
  }
  const double second_last = l[n - 2];
  const double last = l[n - 1];
  report.margins[0] = second_last - 1.0 / std::tan(0.5 * tau);
  report.margins[1] = second_last - std::abs(last);
  report.margins[2] = l[0] + static_cast<double>(n - 1) * last;
  report.pass = std::all_of(report.margins.begin(), report.margins.end(), [](double m) { return m >= -1e-12; });
  return report;
}

RealMatrix cot_theta_hessian(std::span<const double> lambda, double theta_guard) {
  const auto n = static_cast<Eigen::Index>(lambda.size());
  const double cot = cot_theta(lambda, theta_guard);
  const double csc2 = 1.0 + cot * cot;
  RealMatrix h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    const double qi = 1.0 + li * li;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double lj = lambda[static_cast<std::size_t>(j)];
      const double qj = 1.0 + lj * lj;
      h(i, j) = 2.0 * csc2 * cot / (qi * qj);
    }
    h(i, i) -= 2.0 * csc2 * li / (qi * qi);
  }
  return h;
}

PointSpectrum point_spectrum(const HermitianMatrix& w, const HermitianMatrix& g, double theta_guard) {
  PointSpectrum s;
  s.lambda = eigenvalues_descending(w, g);
  s.theta = theta_of(view(s.lambda));
  if (!(s.theta > theta_guard && s.theta < kPi - theta_guard)) {
    throw PhaseSingular("theta = " + std::to_string(s.theta) + " outside the admissible range (0, pi)");
  }
  s.cot_theta = cot_theta(view(s.lambda), theta_guard);
  s.csc2_theta = 1.0 + s.cot_theta * s.cot_theta;
  s.F = linearization_matrix(w, g, s.theta, theta_guard);
  return s;
}

}  // namespace dhym
