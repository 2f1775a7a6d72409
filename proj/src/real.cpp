#include "boys/real.hpp"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <stdexcept>

namespace boys {

namespace {

using UnaryOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

Real unary(const Real& x, UnaryOp op) {
  Real r(x.prec());
  op(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

struct FreeDeleter {
  void operator()(char* p) const { mpfr_free_str(p); }
};

}  // namespace

Real Real::parse(const std::string& text, prec_t bits) {
  Real r(bits);
  char* end = nullptr;
  mpfr_strtofr(r.v_, text.c_str(), &end, 0, MPFR_RNDN);
  if (text.empty() || end == text.c_str() || *end != '\0') {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return r;
}

std::string Real::hex() const {
  char* out = nullptr;
  if (mpfr_asprintf(&out, "%Ra", v_) < 0) throw std::bad_alloc();
  std::unique_ptr<char, FreeDeleter> guard(out);
  return std::string(out);
}

std::string Real::decimal(int digits) const {
  char* out = nullptr;
  if (mpfr_asprintf(&out, "%.*Rg", digits, v_) < 0) throw std::bad_alloc();
  std::unique_ptr<char, FreeDeleter> guard(out);
  return std::string(out);
}

Real abs(const Real& x) { return unary(x, mpfr_abs); }
Real sqrt(const Real& x) { return unary(x, mpfr_sqrt); }
Real exp(const Real& x) { return unary(x, mpfr_exp); }
Real expm1(const Real& x) { return unary(x, mpfr_expm1); }
Real log(const Real& x) { return unary(x, mpfr_log); }
Real log1p(const Real& x) { return unary(x, mpfr_log1p); }
Real log2(const Real& x) { return unary(x, mpfr_log2); }
Real gamma(const Real& x) { return unary(x, mpfr_gamma); }

Real pow(const Real& x, const Real& y) {
  Real r(std::max(x.prec(), y.prec()));
  mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
  return r;
}

Real pow(const Real& x, long k) {
  Real r(x.prec());
  mpfr_pow_si(r.raw(), x.raw(), k, MPFR_RNDN);
  return r;
}

Real ldexp(const Real& x, long e) {
  Real r(x.prec());
  mpfr_mul_2si(r.raw(), x.raw(), e, MPFR_RNDN);
  return r;
}

Real max(const Real& a, const Real& b) { return Real(a < b ? b : a, std::max(a.prec(), b.prec())); }
Real min(const Real& a, const Real& b) { return Real(b < a ? b : a, std::max(a.prec(), b.prec())); }

Real pi(Real::prec_t bits) {
  Real r(bits);
  mpfr_const_pi(r.raw(), MPFR_RNDN);
  return r;
}

}  // namespace boys
