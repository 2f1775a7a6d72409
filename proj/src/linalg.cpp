#include "boys/linalg.hpp"

#include <stdexcept>

namespace boys::linalg {

Matrix::Matrix(std::size_t rows, std::size_t cols, Real::prec_t bits)
    : rows_(rows), cols_(cols), data_(rows * cols, Real(bits)) {}

std::vector<Real> least_squares(Matrix a, std::vector<Real> b) {
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  if (b.size() != m || m < k) throw std::invalid_argument("least_squares: shape mismatch");
  const Real::prec_t bits = b.empty() ? 64 : b.front().prec();

  std::vector<Real> scale(k, Real(bits));
  for (std::size_t j = 0; j < k; ++j) {
    Real s(bits);
    for (std::size_t i = 0; i < m; ++i) mpfr_fma(s.raw(), a(i, j).raw(), a(i, j).raw(), s.raw(), MPFR_RNDN);
    if (s.is_zero()) throw std::runtime_error("least_squares: zero column");
    scale[j] = sqrt(s);
    for (std::size_t i = 0; i < m; ++i) a(i, j) /= scale[j];
  }

  std::vector<Real> diag(k, Real(bits));
  Real tmp(bits);
  for (std::size_t j = 0; j < k; ++j) {
    Real norm(bits);
    for (std::size_t i = j; i < m; ++i) mpfr_fma(norm.raw(), a(i, j).raw(), a(i, j).raw(), norm.raw(), MPFR_RNDN);
    norm = sqrt(norm);
    if (norm.is_zero()) throw std::runtime_error("least_squares: rank deficient");
    const Real alpha = a(j, j).sign() > 0 ? -norm : norm;
    // v = x - alpha e_1 stored in column j; H = I - 2 v v^T / (v^T v)
    a(j, j) -= alpha;
    const Real vtv = 2 * norm * norm - 2 * alpha * (a(j, j) + alpha);  // |x|^2 - 2 alpha x_0 + alpha^2
    diag[j] = alpha;
    for (std::size_t c = j + 1; c < k; ++c) {
      Real dot(bits);
      for (std::size_t i = j; i < m; ++i) mpfr_fma(dot.raw(), a(i, j).raw(), a(i, c).raw(), dot.raw(), MPFR_RNDN);
      const Real f = 2 * dot / vtv;
      for (std::size_t i = j; i < m; ++i) {
        mpfr_mul(tmp.raw(), f.raw(), a(i, j).raw(), MPFR_RNDN);
        mpfr_sub(a(i, c).raw(), a(i, c).raw(), tmp.raw(), MPFR_RNDN);
      }
    }
    Real dot(bits);
    for (std::size_t i = j; i < m; ++i) mpfr_fma(dot.raw(), a(i, j).raw(), b[i].raw(), dot.raw(), MPFR_RNDN);
    const Real f = 2 * dot / vtv;
    for (std::size_t i = j; i < m; ++i) {
      mpfr_mul(tmp.raw(), f.raw(), a(i, j).raw(), MPFR_RNDN);
      mpfr_sub(b[i].raw(), b[i].raw(), tmp.raw(), MPFR_RNDN);
    }
  }

  std::vector<Real> x(k, Real(bits));
  for (std::size_t jj = k; jj-- > 0;) {
    Real s = b[jj];
    for (std::size_t c = jj + 1; c < k; ++c) s -= a(jj, c) * x[c];
    x[jj] = s / diag[jj];
  }
  for (std::size_t j = 0; j < k; ++j) x[j] /= scale[j];
  return x;
}

std::vector<Real> solve(Matrix a, std::vector<Real> b) {
  const std::size_t k = a.rows();
  if (a.cols() != k || b.size() != k) throw std::invalid_argument("solve: shape mismatch");
  for (std::size_t j = 0; j < k; ++j) {
    std::size_t piv = j;
    for (std::size_t i = j + 1; i < k; ++i) {
      if (abs(a(i, j)) > abs(a(piv, j))) piv = i;
    }
    if (a(piv, j).is_zero()) throw std::runtime_error("solve: singular matrix");
    if (piv != j) {
      for (std::size_t c = 0; c < k; ++c) swap(a(j, c), a(piv, c));
      swap(b[j], b[piv]);
    }
    for (std::size_t i = j + 1; i < k; ++i) {
      const Real f = a(i, j) / a(j, j);
      if (f.is_zero()) continue;
      for (std::size_t c = j; c < k; ++c) a(i, c) -= f * a(j, c);
      b[i] -= f * b[j];
    }
  }
  std::vector<Real> x(k, Real(b.empty() ? 64 : b.front().prec()));
  for (std::size_t jj = k; jj-- > 0;) {
    Real s = b[jj];
    for (std::size_t c = jj + 1; c < k; ++c) s -= a(jj, c) * x[c];
    x[jj] = s / a(jj, jj);
  }
  return x;
}

}  // namespace boys::linalg
