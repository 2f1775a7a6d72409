#include "boys/refmath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "boys/errors.hpp"

namespace boys::refmath {

namespace {

using prec_t = Real::prec_t;

constexpr int kGuardBits = 32;

// e^{-x} underflows the default MPFR exponent range near x = 7e8. The range
// is per thread, so every entry point widens it for the calling thread.
void widen_exponent_range() {
  thread_local bool done = false;
  if (done) return;
  mpfr_set_emin(mpfr_get_emin_min());
  mpfr_set_emax(mpfr_get_emax_max());
  done = true;
}

// Called first by every entry point.
void check_order(int n) {
  widen_exponent_range();
  if (n < 0 || n > kMaxOrder) {
    throw DomainError("order n=" + std::to_string(n) + " outside [0, " +
                      std::to_string(kMaxOrder) + "]");
  }
}

void check_argument(const Real& x) {
  if (x.is_nan() || x < 0) throw DomainError("Boys function argument must be >= 0, got " + x.decimal(17));
  if (!x.is_finite()) throw DomainError("Boys function argument must be finite");
}

// Extra bits covering the per-term error accumulation of a sum of ~x terms.
prec_t series_guard(const Real& x) {
  const double xd = std::min(x.to_double(), 1e18);
  return kGuardBits + std::bit_width(static_cast<unsigned long long>(xd) + 1);
}

Real half_order(int n, prec_t w) { return Real(static_cast<long>(2 * n + 1), w) / 2; }

Real gamma_half_order(int n, prec_t w) {
  // Gamma(n + 1/2) = sqrt(pi) (2n-1)!! / 2^n
  Real g = sqrt(pi(w));
  for (int k = 1; k <= n; ++k) g *= 2 * k - 1;
  return ldexp(g, -n);
}

// e^{-x} sum_k (2x)^k / prod_{j<=k} (2n+2j+1). Every term is positive, so the
// only error source is per-term rounding; the tail after the peak is bounded
// by a geometric series.
Real boys_series(int n, const Real& x, prec_t w) {
  const Real two_x = ldexp(Real(x, w), 1);
  const double two_x_d = two_x.to_double();
  Real term = Real(1L, w) / (2 * n + 1);
  Real sum = term;
  const long cap = static_cast<long>(4.0 * x.to_double()) + 64L * w + 1000;
  for (long k = 1;; ++k) {
    if (k > cap) throw PrecisionError("Boys series did not converge");
    const unsigned long den = 2UL * n + 2UL * k + 1UL;
    term *= two_x;
    mpfr_div_ui(term.raw(), term.raw(), den, MPFR_RNDN);
    sum += term;
    const double next_den = static_cast<double>(den + 2);
    if (next_den > two_x_d) {
      const double r = two_x_d / next_den;
      const double tail_log2 = static_cast<double>(term.exponent()) + std::log2(r / (1.0 - r) + 1e-300);
      if (tail_log2 < static_cast<double>(sum.exponent() - static_cast<long>(w) - 2)) break;
    }
  }
  return sum * exp(-Real(x, w));
}

// sum_k (-x)^k / (k! (2n+2k+1)); alternating. The largest term is about e^x
// and the sum can be as small as e^{-x} / (2n+1), so 2 x log2(e) bits cancel.
Real boys_taylor(int n, const Real& x, prec_t w) {
  const prec_t w2 = w + static_cast<prec_t>(std::ceil(x.to_double() * 2.8853900817779268)) +
                    std::bit_width(static_cast<unsigned>(2 * n + 1)) + 8;
  const Real xw(x, w2);
  Real power(1L, w2);  // x^k / k!
  Real sum = power / (2 * n + 1);
  const long cap = static_cast<long>(8.0 * x.to_double()) + 64L * w2 + 1000;
  for (long k = 1;; ++k) {
    if (k > cap) throw PrecisionError("Boys Taylor series did not converge");
    power *= xw;
    power /= k;
    Real term = power / (2 * n + 2 * k + 1);
    if (k % 2 == 1) {
      sum -= term;
    } else {
      sum += term;
    }
    if (k > x.to_double() && term.exponent() < sum.exponent() - static_cast<long>(w2) - 2) break;
  }
  return Real(sum, w);
}

// Continued fraction (modified Lentz) for Gamma(a, x) e^{x} x^{-a}, a = n+1/2.
Real upper_gamma_cf_scaled(int n, const Real& x, prec_t w) {
  const Real a = half_order(n, w);
  const Real xw(x, w);
  const Real tiny = ldexp(Real(1L, w), -static_cast<long>(4 * w));
  Real b = xw + 1 - a;
  Real c = 1 / tiny;
  Real d = 1 / b;
  Real h = d;
  const Real eps = ldexp(Real(1L, w), -static_cast<long>(w) + 2);
  for (long i = 1;; ++i) {
    if (i > 200000) throw PrecisionError("incomplete gamma continued fraction did not converge");
    const Real an = -Real(i, w) * (i - a);
    b += 2;
    d = an * d + b;
    if (abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (abs(c) < tiny) c = tiny;
    d = 1 / d;
    const Real delta = d * c;
    h *= delta;
    if (abs(delta - 1) < eps) break;
  }
  return h;
}

// Gamma(a, x) / Gamma(a) for x >= a + 1, via the continued fraction.
Real upper_ratio_cf(int n, const Real& x, prec_t w) {
  const Real xw(x, w);
  const Real a = half_order(n, w);
  const Real h = upper_gamma_cf_scaled(n, x, w);
  return exp(a * log(xw) - xw) * h / gamma_half_order(n, w);
}

bool use_continued_fraction(int n, const Real& x) { return x >= static_cast<double>(n) + 20.0; }

Real boys_gamma_route(int n, const Real& x, prec_t w) {
  const Real a = half_order(n, w);
  if (x < a + 1) return boys_taylor(n, x, w);
  const Real xw(x, w);
  const Real g = upper_ratio_cf(n, x, w);
  // F = c_n (1 - g) / x^a with c_n = Gamma(a) / 2
  return ldexp(gamma_half_order(n, w), -1) * (1 - g) / exp(a * log(xw));
}

Real boys_at(int n, const Real& x, prec_t w, Method method) {
  w = std::max(w, x.prec());
  if (x.is_zero()) return Real(1L, w) / (2 * n + 1);
  switch (method) {
    case Method::series:
      return boys_series(n, x, w + series_guard(x));
    case Method::incomplete_gamma:
      return boys_gamma_route(n, x, w + kGuardBits);
    case Method::automatic:
      break;
  }
  if (use_continued_fraction(n, x)) return boys_gamma_route(n, x, w + kGuardBits);
  return boys_series(n, x, w + series_guard(x));
}

// Q_n(x) = exp((x + ln d) / p) where d = Q^p e^{-x} = (c/F)^{1/p} - x.
Real q_from_inner(int n, const Real& x, const Real& d, prec_t w) {
  return exp((Real(x, w) + log(d)) / half_order(n, w));
}

}  // namespace

Precision::Precision(int bits) : bits_(bits) {
  if (bits < 64) throw std::invalid_argument("precision must be at least 64 bits, got " + std::to_string(bits));
}

Real boys_ref(int n, const Real& x, Precision prec, Method method) {
  check_order(n);
  check_argument(x);
  return Real(boys_at(n, x, prec.mpfr_bits(), method), prec.mpfr_bits());
}

Real boys_ref(int n, double x, Precision prec, Method method) {
  return boys_ref(n, Real(x, 64), prec, method);
}

std::vector<Real> boys_ref_all(int n, const Real& x, Precision prec) {
  check_order(n);
  check_argument(x);
  const prec_t w = prec.mpfr_bits() + 16;
  std::vector<Real> out(static_cast<std::size_t>(n) + 1);
  Real f = boys_at(n, x, w, Method::automatic);
  const Real xw(x, w);
  const Real two_x = ldexp(xw, 1);
  const Real t = exp(-xw);
  out[n] = Real(f, prec.mpfr_bits());
  for (int m = n; m >= 1; --m) {
    f = (two_x * f + t) / (2 * m - 1);
    out[m - 1] = Real(f, prec.mpfr_bits());
  }
  return out;
}

Real upper_gamma_ratio(int n, const Real& x, Precision prec) {
  check_order(n);
  check_argument(x);
  const prec_t w = prec.mpfr_bits() + kGuardBits;
  if (x.is_zero()) return Real(1L, prec.mpfr_bits());
  Real g(w);
  if (x >= half_order(n, w) + 1) {
    g = upper_ratio_cf(n, x, w);
  } else {
    // g >= 1/4 here, so the subtraction is harmless.
    const Real xw(x, w);
    const Real f = boys_series(n, x, w + series_guard(x));
    g = 1 - exp(half_order(n, w) * log(xw)) * f / ldexp(gamma_half_order(n, w), -1);
  }
  return Real(g, prec.mpfr_bits());
}

Real boys_prefactor(int n, Precision prec) {
  check_order(n + 0);
  return Real(ldexp(gamma_half_order(n, prec.mpfr_bits() + kGuardBits), -1), prec.mpfr_bits());
}

AnalyticConstants constants(int n, Precision prec) {
  check_order(n);
  const prec_t w = prec.mpfr_bits() + kGuardBits;
  const Real c = ldexp(gamma_half_order(n, w), -1);
  const Real c_next = ldexp(gamma_half_order(n + 1, w), -1);
  const long two_n1 = 2L * n + 1;
  const Real inv_p = Real(2L, w) / two_n1;  // 1 / (n + 1/2)
  const Real alpha = pow(2 * c_next, -inv_p);
  const Real beta = alpha * (2L * n - 1) / two_n1;
  const Real scaled = c * two_n1;  // (2n+1) c_n
  const Real q0 = pow(scaled, Real(4L, w) / (two_n1 * two_n1));
  const Real q1 = 2 * q0 / two_n1 * (Real(2L * n + 5, w) / (2L * n + 3) - pow(scaled, -inv_p));
  const prec_t b = prec.mpfr_bits();
  return AnalyticConstants{n, Real(c, b), Real(alpha, b), Real(beta, b), Real(q0, b), Real(q1, b)};
}

Real q_of_x(int n, const Real& x, Precision prec) {
  check_order(n);
  check_argument(x);
  const prec_t bits = prec.mpfr_bits();
  if (x.is_zero()) return constants(n, prec).q0;

  if (use_continued_fraction(n, x)) {
    // d = x ((1 - g)^{-1/p} - 1) with g the upper ratio; no cancellation.
    const prec_t w = bits + kGuardBits;
    const Real xw(x, w);
    const Real g = upper_ratio_cf(n, x, w);
    const Real d = xw * expm1(-log1p(-g) / half_order(n, w));
    return Real(q_from_inner(n, x, d, w), bits);
  }

  // (c/F)^{1/p} - x cancels about x log2(e) bits; escalate until the
  // difference keeps enough significant bits.
  prec_t w = bits + kGuardBits + static_cast<prec_t>(std::ceil(1.5 * x.to_double()));
  for (int attempt = 0; attempt < 8; ++attempt) {
    const Real xw(x, w);
    const Real f = boys_series(n, x, w + series_guard(x));
    const Real c = ldexp(gamma_half_order(n, w), -1);
    const Real ratio = exp(log(c / f) / half_order(n, w));
    const Real d = ratio - xw;
    const long lost = d.sign() > 0 ? xw.exponent() - d.exponent() : static_cast<long>(w);
    if (d.sign() > 0 && lost < static_cast<long>(w - bits) - 24) {
      return Real(q_from_inner(n, x, d, w), bits);
    }
    w = std::max<prec_t>(2 * w, bits + static_cast<prec_t>(std::max(lost, 0L)) + 48);
  }
  throw PrecisionError("Q_n(x) lost too many bits to cancellation at x=" + x.decimal(20));
}

std::vector<ReferencePoint> q_grid(int n, std::span<const Real> xs, Precision prec) {
  if (!std::is_sorted(xs.begin(), xs.end())) throw DomainError("q_grid abscissae must be sorted ascending");
  std::vector<ReferencePoint> out;
  out.reserve(xs.size());
  for (const Real& x : xs) {
    out.push_back(ReferencePoint{n, Real(x, prec.mpfr_bits()), boys_ref(n, x, prec), q_of_x(n, x, prec)});
  }
  return out;
}

Real cutoff_solve(int n, int b, Precision prec) {
  check_order(n);
  if (b < 1 || b > prec.bits() - 16) {
    throw DomainError("cutoff bits b=" + std::to_string(b) + " outside [1, prec-16]");
  }
  const prec_t w = prec.mpfr_bits() + kGuardBits;
  const Precision wp(static_cast<int>(w));
  const Real log_target = -Real(static_cast<long>(b), w) * log(Real(2L, w));
  const Real a = half_order(n, w);
  const Real gamma_a = gamma_half_order(n, w);

  // phi(z) = ln g(z) - ln 2^-b is strictly decreasing.
  auto phi = [&](const Real& z) { return log(upper_gamma_ratio(n, z, wp)) - log_target; };

  Real lo(0L, w);
  Real hi = a + 1;
  while (phi(hi) > 0) {
    lo = hi;
    hi = ldexp(hi, 1);
    if (hi > 1e7) throw std::logic_error("cutoff bracket failure");
  }

  Real z = (lo + hi) / 2;
  const Real tol = ldexp(Real(1L, w), -static_cast<long>(w) + 8);
  for (int it = 0; it < 2000; ++it) {
    const Real g = upper_gamma_ratio(n, z, wp);
    const Real value = log(g) - log_target;
    if (value > 0) {
      lo = z;
    } else {
      hi = z;
    }
    // d/dz ln g = -z^{a-1} e^{-z} / (Gamma(a) g)
    const Real slope = -exp((a - 1) * log(z) - z) / (gamma_a * g);
    Real next = z - value / slope;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    const Real step = abs(next - z);
    z = next;
    if (step <= tol * z || hi - lo <= tol * z) break;
  }
  return Real(z, prec.mpfr_bits());
}

void CutoffTable::insert(CutoffEntry entry) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), entry, [](const CutoffEntry& l, const CutoffEntry& r) {
    return std::pair(l.n, l.b) < std::pair(r.n, r.b);
  });
  if (it != entries_.end() && it->n == entry.n && it->b == entry.b) {
    *it = std::move(entry);
  } else {
    entries_.insert(it, std::move(entry));
  }
}

const Real* CutoffTable::find(int n, int b) const {
  for (const auto& e : entries_) {
    if (e.n == n && e.b == b) return &e.z;
  }
  return nullptr;
}

const Real& CutoffTable::at(int n, int b) const {
  if (const Real* z = find(n, b)) return *z;
  throw std::out_of_range("no cutoff for n=" + std::to_string(n) + ", b=" + std::to_string(b));
}

bool operator==(const CutoffTable& a, const CutoffTable& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& l = a.entries_[i];
    const auto& r = b.entries_[i];
    if (l.n != r.n || l.b != r.b || !l.z.identical(r.z)) return false;
  }
  return true;
}

CutoffTable tabulate_cutoffs(std::span<const int> orders, std::span<const int> bits_list, Precision prec) {
  CutoffTable table;
  for (int n : orders) {
    for (int b : bits_list) table.insert(CutoffEntry{n, b, cutoff_solve(n, b, prec)});
  }
  return table;
}

QSamples fig1_samples(int n_max, std::span<const Real> xs, Precision prec) {
  check_order(n_max);
  QSamples out;
  out.n_max = n_max;
  for (const Real& x : xs) {
    out.xs.emplace_back(x, prec.mpfr_bits());
    std::vector<Real> row;
    row.reserve(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) row.push_back(q_of_x(n, x, prec));
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_tsv(std::ostream& out, const QSamples& samples, Precision prec) {
  const int digits = static_cast<int>(std::ceil(prec.bits() * 0.30102999566398120)) + 1;
  out << "# x";
  for (int n = 0; n <= samples.n_max; ++n) out << "\tQ" << n;
  out << '\n';
  for (std::size_t i = 0; i < samples.xs.size(); ++i) {
    out << samples.xs[i].decimal(digits);
    for (const Real& q : samples.rows[i]) out << '\t' << q.decimal(digits);
    out << '\n';
  }
}

}  // namespace boys::refmath
