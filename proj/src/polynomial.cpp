#include "boys/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "boys/errors.hpp"

namespace boys::poly {

namespace {

using cld = std::complex<long double>;

Complex mul(const Complex& a, const Complex& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

Complex div(const Complex& a, const Complex& b) {
  const Real den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

Complex sub(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }

Real norm(const Complex& a) { return sqrt(a.re * a.re + a.im * a.im); }

std::vector<cld> aberth_long_double(const std::vector<long double>& monic) {
  const std::size_t d = monic.size() - 1;
  long double radius = 0;
  for (std::size_t k = 0; k < d; ++k) {
    if (monic[k] != 0) {
      radius = std::max(radius, std::pow(std::fabs(monic[k]), 1.0L / static_cast<long double>(d - k)));
    }
  }
  radius = std::max(radius, 1e-3L);
  std::vector<cld> z(d);
  for (std::size_t j = 0; j < d; ++j) {
    const long double angle = 2 * std::numbers::pi_v<long double> * j / d + 0.4L;
    z[j] = std::polar(radius, angle);
  }
  for (int it = 0; it < 5000; ++it) {
    long double worst = 0;
    for (std::size_t j = 0; j < d; ++j) {
      cld p = 1, dp = 0;
      for (std::size_t k = d; k-- > 0;) {
        dp = dp * z[j] + p;
        p = p * z[j] + monic[k];
      }
      if (dp == cld(0)) dp = 1e-30L;
      const cld ratio = p / dp;
      cld s = 0;
      for (std::size_t l = 0; l < d; ++l) {
        if (l != j) s += 1.0L / (z[j] - z[l]);
      }
      const cld w = ratio / (1.0L - ratio * s);
      z[j] -= w;
      worst = std::max(worst, std::abs(w) / std::max(std::abs(z[j]), 1e-30L));
    }
    if (worst < 1e-17L) break;
  }
  return z;
}

}  // namespace

Real horner(std::span<const Real> coeffs, const Real& x) {
  if (coeffs.empty()) return Real(x.prec());
  Real acc = coeffs.back();
  for (std::size_t k = coeffs.size() - 1; k-- > 0;) {
    acc *= x;
    acc += coeffs[k];
  }
  return acc;
}

std::vector<Complex> roots(std::span<const Real> coeffs) {
  if (coeffs.size() < 2 || coeffs.back().is_zero()) throw std::invalid_argument("roots: need degree >= 1");
  const std::size_t d = coeffs.size() - 1;
  const Real::prec_t bits = coeffs.back().prec();
  std::vector<Real> monic;
  for (const Real& c : coeffs) monic.push_back(c / coeffs.back());
  std::vector<long double> monic_ld;
  for (const Real& c : monic) monic_ld.push_back(c.to_long_double());

  std::vector<Complex> z;
  for (const cld& s : aberth_long_double(monic_ld)) {
    z.push_back({Real(static_cast<double>(s.real()), bits), Real(static_cast<double>(s.imag()), bits)});
    mpfr_set_ld(z.back().re.raw(), s.real(), MPFR_RNDN);
    mpfr_set_ld(z.back().im.raw(), s.imag(), MPFR_RNDN);
  }

  const Real tol = ldexp(Real(1L, bits), -static_cast<long>(bits) + 6);
  const Real one(1L, bits);
  bool converged = false;
  Real worst(bits);
  for (int it = 0; it < 400 && !converged; ++it) {
    worst = Real(0L, bits);
    for (std::size_t j = 0; j < d; ++j) {
      Complex p{one, Real(bits)};
      Complex dp{Real(bits), Real(bits)};
      for (std::size_t k = d; k-- > 0;) {
        dp = mul(dp, z[j]);
        dp.re += p.re;
        dp.im += p.im;
        p = mul(p, z[j]);
        p.re += monic[k];
      }
      if (dp.re.is_zero() && dp.im.is_zero()) dp.re = ldexp(one, -static_cast<long>(bits));
      const Complex ratio = div(p, dp);
      Complex s{Real(bits), Real(bits)};
      for (std::size_t l = 0; l < d; ++l) {
        if (l == j) continue;
        const Complex t = div(Complex{one, Real(bits)}, sub(z[j], z[l]));
        s.re += t.re;
        s.im += t.im;
      }
      const Complex rs = mul(ratio, s);
      const Complex w = div(ratio, Complex{one - rs.re, -rs.im});
      z[j] = sub(z[j], w);
      const Real mag = norm(z[j]);
      const Real rel = norm(w) / (mag.is_zero() ? one : mag);
      if (rel > worst) worst = rel;
    }
    converged = worst <= tol;
  }
  if (!converged && worst > ldexp(one, -static_cast<long>(bits) / 2)) {
    throw RootRefinementError("polynomial root iteration did not converge");
  }
  return z;
}

std::vector<Real> multiply(std::span<const Real> a, std::span<const Real> b) {
  if (a.empty() || b.empty()) return {};
  const Real::prec_t bits = std::max(a.front().prec(), b.front().prec());
  std::vector<Real> out(a.size() + b.size() - 1, Real(bits));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace boys::poly
