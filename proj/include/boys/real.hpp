#pragma once

// Value-semantic wrapper around an MPFR number.
//
// Every Real carries its own precision. The result of a binary operation
// between two Reals has the larger of the two precisions; scalar operands
// (integers, doubles) do not influence the result precision. All rounding is
// to nearest.

#include <mpfr.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <string>
#include <utility>

namespace boys {

class Real {
 public:
  using prec_t = mpfr_prec_t;

  Real() : Real(prec_t{64}) {}
  explicit Real(prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_zero(v_, 1);
  }
  Real(double value, prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_d(v_, value, MPFR_RNDN);
  }
  Real(long value, prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set_si(v_, value, MPFR_RNDN);
  }
  Real(int value, prec_t bits) : Real(static_cast<long>(value), bits) {}
  // Rounds `other` to `bits`.
  Real(const Real& other, prec_t bits) {
    mpfr_init2(v_, bits);
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }

  Real(const Real& other) {
    mpfr_init2(v_, other.prec());
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  Real(Real&& other) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, other.v_);
  }
  Real& operator=(const Real& other) {
    if (this != &other) {
      mpfr_set_prec(v_, other.prec());
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  // Parses decimal or hexadecimal ("0x1.8p+3") text. Throws std::invalid_argument
  // when the whole string is not a number.
  static Real parse(const std::string& text, prec_t bits);

  prec_t prec() const { return mpfr_get_prec(v_); }
  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  float to_float() const { return mpfr_get_flt(v_, MPFR_RNDN); }
  long double to_long_double() const { return mpfr_get_ld(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  // Lowercase hexadecimal literal of the exact stored value, e.g. "0x1.8p+3".
  std::string hex() const;
  // Decimal text with `digits` significant digits.
  std::string decimal(int digits) const;

  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  // Binary exponent e with value = m * 2^e, 0.5 <= |m| < 1.
  long exponent() const { return is_zero() ? 0 : mpfr_get_exp(v_); }

  // Same value, different precision.
  Real rounded(prec_t bits) const { return Real(*this, bits); }

  Real operator-() const {
    Real r(prec());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  Real& operator+=(const Real& o) { return apply(o, mpfr_add); }
  Real& operator-=(const Real& o) { return apply(o, mpfr_sub); }
  Real& operator*=(const Real& o) { return apply(o, mpfr_mul); }
  Real& operator/=(const Real& o) { return apply(o, mpfr_div); }

  template <std::integral I>
  Real& operator+=(I o) { mpfr_add_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
  template <std::integral I>
  Real& operator-=(I o) { mpfr_sub_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
  template <std::integral I>
  Real& operator*=(I o) { mpfr_mul_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
  template <std::integral I>
  Real& operator/=(I o) { mpfr_div_si(v_, v_, static_cast<long>(o), MPFR_RNDN); return *this; }
  Real& operator+=(double o) { mpfr_add_d(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator-=(double o) { mpfr_sub_d(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator*=(double o) { mpfr_mul_d(v_, v_, o, MPFR_RNDN); return *this; }
  Real& operator/=(double o) { mpfr_div_d(v_, v_, o, MPFR_RNDN); return *this; }

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }

  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator+(Real a, S b) { return a += b; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator-(Real a, S b) { return a -= b; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator*(Real a, S b) { return a *= b; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator/(Real a, S b) { return a /= b; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator+(S a, Real b) { return b += a; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator*(S a, Real b) { return b *= a; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator-(S a, const Real& b) { return (-b) += a; }
  template <typename S>
    requires std::integral<S> || std::floating_point<S>
  friend Real operator/(S a, const Real& b) {
    Real r(b.prec());
    if constexpr (std::integral<S>) {
      mpfr_si_div(r.v_, static_cast<long>(a), b.v_, MPFR_RNDN);
    } else {
      mpfr_d_div(r.v_, static_cast<double>(a), b.v_, MPFR_RNDN);
    }
    return r;
  }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b) {
    if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
    const int c = mpfr_cmp(a.v_, b.v_);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }
  friend bool operator==(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) == 0 && !a.is_nan(); }
  friend std::partial_ordering operator<=>(const Real& a, double b) {
    if (a.is_nan() || b != b) return std::partial_ordering::unordered;
    const int c = mpfr_cmp_d(a.v_, b);
    return c < 0 ? std::partial_ordering::less
                 : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
  }

  // Exact equality of value and precision, used for bit-exact round trips.
  bool identical(const Real& o) const {
    if (prec() != o.prec()) return false;
    if (is_nan() || o.is_nan()) return is_nan() && o.is_nan();
    return mpfr_equal_p(v_, o.v_) != 0 && mpfr_signbit(v_) == mpfr_signbit(o.v_);
  }

  friend void swap(Real& a, Real& b) noexcept { mpfr_swap(a.v_, b.v_); }

 private:
  using BinaryOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);

  Real& apply(const Real& o, BinaryOp op) {
    if (o.prec() > prec()) mpfr_prec_round(v_, o.prec(), MPFR_RNDN);
    op(v_, v_, o.v_, MPFR_RNDN);
    return *this;
  }

  mpfr_t v_;
};

// Elementary functions; result precision equals the argument precision.
Real abs(const Real& x);
Real sqrt(const Real& x);
Real exp(const Real& x);
Real expm1(const Real& x);
Real log(const Real& x);
Real log1p(const Real& x);
Real log2(const Real& x);
Real pow(const Real& x, const Real& y);
Real pow(const Real& x, long k);
Real ldexp(const Real& x, long e);
Real gamma(const Real& x);
Real max(const Real& a, const Real& b);
Real min(const Real& a, const Real& b);
Real pi(Real::prec_t bits);

}  // namespace boys
