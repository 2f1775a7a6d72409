#pragma once

// Arbitrary-precision reference values of the Boys functions
//
//   F_n(x) = \int_0^1 t^{2n} exp(-x t^2) dt,
//
// of the auxiliary function Q_n(x) implicitly defined by
//
//   F_n(x) = c_n / (x + Q_n(x)^{n+1/2} exp(-x))^{n+1/2},
//
// and of the constants fixing Q_n at x = 0 and x -> infinity. These are the
// ground truth used by the fitter, the error scans and the tests.

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "boys/real.hpp"

namespace boys::refmath {

inline constexpr int kMaxOrder = 64;

// Working mantissa bits of a reference computation. Results are accurate to
// 2^-(bits-8) relative.
class Precision {
 public:
  explicit Precision(int bits);
  int bits() const { return bits_; }
  Real::prec_t mpfr_bits() const { return bits_; }

 private:
  int bits_;
};

enum class Method {
  automatic,         // series below x = n + 20, continued fraction above
  series,            // e^{-x} sum (2x)^k / (2n+1)(2n+3)...(2n+2k+1), any x
  incomplete_gamma,  // [Gamma(n+1/2) - Gamma(n+1/2, x)] / (2 x^{n+1/2})
};

Real boys_ref(int n, const Real& x, Precision prec, Method method = Method::automatic);
Real boys_ref(int n, double x, Precision prec, Method method = Method::automatic);

// F_0(x) .. F_n(x) from one evaluation of F_n followed by downward recursion
// carried out at working precision.
std::vector<Real> boys_ref_all(int n, const Real& x, Precision prec);

// Gamma(n+1/2, x) / Gamma(n+1/2), i.e. 1 - x^{n+1/2} F_n(x) / c_n.
Real upper_gamma_ratio(int n, const Real& x, Precision prec);

struct AnalyticConstants {
  int n = 0;
  Real c;      // c_n = (2n)! sqrt(pi) / (n! 2^{2n+1}), the x -> inf prefactor
  Real alpha;  // slope of the linear asymptote of Q_n
  Real beta;   // intercept of that asymptote
  Real q0;     // Q_n(0)
  Real q1;     // Q_n'(0)
};

AnalyticConstants constants(int n, Precision prec);

// c_n alone.
Real boys_prefactor(int n, Precision prec);

Real q_of_x(int n, const Real& x, Precision prec);

struct ReferencePoint {
  int n = 0;
  Real x;
  Real f;  // F_n(x)
  Real q;  // Q_n(x)
};

// Pre: xs sorted ascending, all >= 0.
std::vector<ReferencePoint> q_grid(int n, std::span<const Real> xs, Precision prec);

// z with (z^{n+1/2} / c_n) F_n(z) = 1 - 2^-b. Beyond z the asymptote
// c_n x^{-(n+1/2)} is accurate to about b bits.
Real cutoff_solve(int n, int b, Precision prec);

struct CutoffEntry {
  int n = 0;
  int b = 0;
  Real z;
};

class CutoffTable {
 public:
  // Replaces an existing (n, b) entry; keeps entries sorted by (n, b).
  void insert(CutoffEntry entry);
  const Real* find(int n, int b) const;
  const Real& at(int n, int b) const;
  const std::vector<CutoffEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const CutoffTable& a, const CutoffTable& b);

 private:
  std::vector<CutoffEntry> entries_;
};

CutoffTable tabulate_cutoffs(std::span<const int> orders, std::span<const int> bits_list,
                             Precision prec);

// Rows of (x, Q_0(x), ..., Q_{n_max}(x)).
struct QSamples {
  int n_max = 0;
  std::vector<Real> xs;
  std::vector<std::vector<Real>> rows;  // rows[i][n] = Q_n(xs[i])
};

QSamples fig1_samples(int n_max, std::span<const Real> xs, Precision prec);

// Tab-separated, one row per x, decimal digits matching the precision.
void write_tsv(std::ostream& out, const QSamples& samples, Precision prec);

}  // namespace boys::refmath
