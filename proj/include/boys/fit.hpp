#pragma once

// Constrained minimax fitting of the rational model
//
//   Q~_n(x) = (A_0 + A_1 x + ... + A_{N+1} x^{N+1}) / (1 + B_1 x + ... + B_N x^N)
//
// to Q_n(x), measured by the uniform relative error of the Boys function it
// induces, and conversion of the result into the root-factored form
//
//   Q~_n(x) = q0 + q1 x + q2 x^2 u(x) / v(x)
//
// used for finite-precision evaluation.

#include <span>
#include <string>
#include <vector>

#include "boys/real.hpp"
#include "boys/refmath.hpp"

namespace boys::fit {

using refmath::Precision;

// The four constraints tie the model to Q_n(0), Q_n'(0) and the asymptote
// alpha x + beta. We eliminate A_0, A_1, A_N and A_{N+1}:
//   A_0     = q0
//   A_1     = q1 + q0 B_1
//   A_N     = beta B_N + alpha B_{N-1}     (B_0 = 1)
//   A_{N+1} = alpha B_N
// The free parameters are B_1..B_N followed by A_2..A_{N-1}.
struct RationalCoeffs {
  int n = 0;
  int N = 0;
  std::vector<Real> A;  // A_0 .. A_{N+1}
  std::vector<Real> B;  // B_1 .. B_N

  // B_k with B_0 = 1.
  Real b(int k) const;
  Real numerator(const Real& x) const;
  Real denominator(const Real& x) const;
  Real value(const Real& x) const { return numerator(x) / denominator(x); }

  bool identical(const RationalCoeffs& o) const;
};

inline int free_parameter_count(int N) { return 2 * N - 2; }

RationalCoeffs constrain(int n, int N, std::span<const Real> free, const refmath::AnalyticConstants& k);
RationalCoeffs constrain(int n, int N, std::span<const Real> free, Precision prec);

// (x - center)^2 + offset, offset = (imaginary part of the root)^2 > 0.
struct QuadraticFactor {
  Real center;
  Real offset;
};

struct RootFactoredForm {
  int n = 0;
  int N = 0;
  Real q0, q1, q2;
  std::vector<QuadraticFactor> u_quads;
  std::vector<Real> u_lins;  // roots y of the factors (x - y)
  std::vector<QuadraticFactor> v_quads;
  std::vector<Real> v_lins;
  // Optional gathered factor: the monic product of every factor whose roots
  // have negative real part, ascending coefficients without the leading 1.
  // Empty when the factors are kept separate.
  std::vector<Real> u_gathered;
  std::vector<Real> v_gathered;

  int u_degree() const;
  int v_degree() const;
  Real u(const Real& x) const;
  Real v(const Real& x) const;
  Real value(const Real& x) const;

  bool identical(const RootFactoredForm& o) const;
};

// The fit grid: `uniform_points` equally spaced on [0, cutoff] followed by
// `tail_points` equally spaced in t = x / (x + n + 1) beyond the cutoff.
struct GridSpec {
  int target_bits = 53;
  Real cutoff;
  int uniform_points = 1024;
  int tail_points = 1024;

  std::vector<Real> points(int n) const;
  GridSpec refined(int factor) const;
  std::string describe() const;
  bool identical(const GridSpec& o) const;
};

struct ApproxSolution {
  RationalCoeffs rational;
  RootFactoredForm factored;
  double exact_error_bits = 0;  // -log2 max |F~/F - 1|
  GridSpec grid;
  int prec_bits = 0;

  int n() const { return rational.n; }
  int N() const { return rational.N; }
  bool identical(const ApproxSolution& o) const;
};

// F~_n(x) from a value of Q~ at x, at the precision of the arguments.
// Returns NaN when q <= 0.
Real boys_from_q(int n, const Real& c, const Real& q, const Real& x);

struct ErrorScan {
  Real max_error;  // max |F~/F - 1|
  Real argmax;
  double bits() const;  // -log2 max_error
};

// Throws FitRejected when the denominator vanishes or changes sign on the grid.
ErrorScan relative_error_scan(const RationalCoeffs& r, std::span<const Real> grid, Precision prec);

struct FitOptions {
  int target_bits = 53;  // selects the grid cutoff z_{n, target_bits + 8}
  int uniform_points = 1024;
  int tail_points = 1024;
  int max_lawson = 60;
  int max_exchange = 30;
  bool gather = false;  // pass to factorize
};

// Throws FitRejected (B_N <= 0, pole on [0, inf), Q~ not positive) or
// NoSolution (optimizer failure).
ApproxSolution fit_minimax(int n, int N, Precision prec, const FitOptions& options = {});

// Throws RootRefinementError when the factors do not reproduce u or v.
RootFactoredForm factorize(const RationalCoeffs& r, Precision prec, bool gather = false);

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  double recomputed_error_bits = 0;
  double coarse_grid_bits = 0;
  double fine_grid_bits = 0;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const ApproxSolution& sol, Precision prec);

// Alternating extrema of F~/F - 1 over a grid, one per sign run, locations
// refined between grid neighbours. Exposed for testing equioscillation.
struct Extremum {
  Real x;
  Real error;
};
std::vector<Extremum> alternating_extrema(const RationalCoeffs& r, std::span<const Real> grid, Precision prec);

}  // namespace boys::fit
