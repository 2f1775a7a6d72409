#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "boys/errors.hpp"
#include "boys/fit.hpp"

using namespace boys;
using namespace boys::fit;

namespace {

const Precision kPrec(256);

double agree_bits(const Real& a, const Real& b) {
  const Real d = abs(a / b - 1);
  if (d.is_zero()) return 1e9;
  return -log2(d).to_double();
}

FitOptions single_target() {
  FitOptions o;
  o.target_bits = 24;
  return o;
}

// Fits are slow enough that each (n, N) is computed once per process.
const ApproxSolution& cached_fit(int n, int N, bool gather = false) {
  static std::map<std::tuple<int, int, bool>, ApproxSolution> cache;
  const auto key = std::make_tuple(n, N, gather);
  auto it = cache.find(key);
  if (it == cache.end()) {
    FitOptions o = single_target();
    o.gather = gather;
    it = cache.emplace(key, fit_minimax(n, N, kPrec, o)).first;
  }
  return it->second;
}

std::vector<Real> random_free(int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<Real> free;
  for (int k = 0; k < free_parameter_count(N); ++k) free.emplace_back(u(rng), 256);
  return free;
}

}  // namespace

TEST(Constrain, EndpointConditionsHoldForAnyFreeParameters) {
  std::mt19937_64 rng(7);
  for (int n : {0, 3, 8}) {
    const auto k = refmath::constants(n, kPrec);
    for (int N : {2, 4, 7}) {
      const RationalCoeffs r = constrain(n, N, random_free(N, rng), kPrec);
      ASSERT_EQ(r.A.size(), static_cast<std::size_t>(N) + 2);
      ASSERT_EQ(r.B.size(), static_cast<std::size_t>(N));
      EXPECT_GE(agree_bits(r.value(Real(0L, 256)), k.q0), 250);
      const Real h = ldexp(Real(1L, 256), -100);
      EXPECT_GE(agree_bits((r.value(h) - k.q0) / h, k.q1), 90) << n << " " << N;
    }
  }
}

TEST(Constrain, LinearAsymptote) {
  std::mt19937_64 rng(11);
  for (int n : {0, 5}) {
    const auto k = refmath::constants(n, kPrec);
    const RationalCoeffs r = constrain(n, 5, random_free(5, rng), kPrec);
    // The gap to alpha X + beta decays like 1/X.
    double prev = 0;
    for (double X : {1e4, 1e5, 1e6}) {
      const Real x(X, 256);
      const double gap = abs(r.value(x) - (k.alpha * x + k.beta)).to_double();
      if (prev > 0) {
        EXPECT_LT(gap, prev / 5) << n << " " << X;
      }
      prev = gap;
    }
    EXPECT_LT(prev, 1e-3);
  }
}

TEST(Constrain, RejectsWrongParameterCount) {
  std::vector<Real> free(3, Real(1L, 256));
  EXPECT_THROW(constrain(0, 3, free, kPrec), std::invalid_argument);
  EXPECT_THROW(constrain(0, 1, free, kPrec), DomainError);
}

TEST(FitMinimax, SingleTargetSmallDegrees) {
  EXPECT_GE(cached_fit(0, 4).exact_error_bits, 25.0);
  EXPECT_GE(cached_fit(5, 5).exact_error_bits, 21.0);
}

TEST(FitMinimax, Equioscillates) {
  for (auto [n, N] : {std::pair{0, 4}, std::pair{5, 5}}) {
    const ApproxSolution& s = cached_fit(n, N);
    const auto grid = s.grid.points(n);
    const auto ext = alternating_extrema(s.rational, grid, kPrec);
    const Real level(std::exp2(-s.exact_error_bits), 256);
    int near_level = 0;
    for (std::size_t i = 0; i < ext.size(); ++i) {
      if (abs(ext[i].error) >= level * Real(0.95, 256)) ++near_level;
      if (i > 0) {
        EXPECT_NE(ext[i].error.sign(), ext[i - 1].error.sign());
        EXPECT_LT(ext[i - 1].x, ext[i].x);
      }
    }
    EXPECT_GE(near_level, 2 * N - 1) << n;
  }
}

TEST(FitMinimax, ErrorShrinksWithDegree) {
  double prev = 0;
  for (int N : {3, 4, 5}) {
    const double bits = cached_fit(0, N).exact_error_bits;
    EXPECT_GT(bits, prev + 2) << N;
    prev = bits;
  }
}

TEST(FitMinimax, Deterministic) {
  const ApproxSolution again = fit_minimax(0, 4, kPrec, single_target());
  EXPECT_TRUE(again.identical(cached_fit(0, 4)));
}

TEST(FitMinimax, RejectsBadArguments) {
  EXPECT_THROW(fit_minimax(0, 4, Precision(128)), std::invalid_argument);
  EXPECT_THROW(fit_minimax(0, 1, kPrec), DomainError);
}

TEST(FitMinimax, ReportedErrorMatchesIndependentScan) {
  const ApproxSolution& s = cached_fit(2, 5);
  const auto grid = s.grid.refined(2).points(2);
  const ErrorScan scan = relative_error_scan(s.rational, grid, kPrec);
  EXPECT_NEAR(scan.bits(), s.exact_error_bits, 0.1);
}

TEST(Factorize, DegreesAndAgreement) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1e3);
  for (auto [n, N] : {std::pair{0, 4}, std::pair{5, 5}, std::pair{2, 5}}) {
    const ApproxSolution& s = cached_fit(n, N);
    const RootFactoredForm& f = s.factored;
    EXPECT_EQ(f.u_degree(), N - 1);
    EXPECT_EQ(f.v_degree(), N);
    EXPECT_EQ(2 * static_cast<int>(f.u_quads.size()) + static_cast<int>(f.u_lins.size()), N - 1);
    EXPECT_EQ(2 * static_cast<int>(f.v_quads.size()) + static_cast<int>(f.v_lins.size()), N);
    for (const auto& q : f.v_quads) EXPECT_GT(q.offset, 0);
    for (const auto& q : f.u_quads) EXPECT_GT(q.offset, 0);
    for (int i = 0; i < 100; ++i) {
      const Real x(u(rng), 256);
      EXPECT_GE(agree_bits(f.value(x), s.rational.value(x)), 60) << n << " x=" << x.to_double();
    }
  }
}

TEST(Factorize, GatheredFormIsTheSameFunction) {
  const ApproxSolution& plain = cached_fit(5, 5);
  const RootFactoredForm g = factorize(plain.rational, kPrec, true);
  EXPECT_EQ(g.u_degree(), plain.factored.u_degree());
  EXPECT_EQ(g.v_degree(), plain.factored.v_degree());
  for (double x : {0.0, 0.25, 3.0, 17.0, 80.0, 900.0}) {
    const Real r(x, 256);
    EXPECT_GE(agree_bits(g.value(r), plain.factored.value(r)), 60) << x;
  }
  const ApproxSolution& fitted = cached_fit(5, 5, true);
  EXPECT_TRUE(fitted.factored.identical(g));
}

TEST(Validate, AcceptsFittedSolution) {
  const ValidationReport v = validate(cached_fit(0, 4), kPrec);
  EXPECT_TRUE(v.ok()) << (v.violations.empty() ? "" : v.violations.front());
  EXPECT_NEAR(v.recomputed_error_bits, cached_fit(0, 4).exact_error_bits, 0.1);
}

TEST(Validate, FlagsCorruptedCoefficient) {
  ApproxSolution s = cached_fit(0, 4);
  s.rational.B.back() *= Real(1.01, 256);
  EXPECT_FALSE(validate(s, kPrec).ok());
}

TEST(Validate, FlagsWrongReportedError) {
  ApproxSolution s = cached_fit(0, 4);
  s.exact_error_bits += 1;
  EXPECT_FALSE(validate(s, kPrec).ok());
}

TEST(ErrorScan, PoleIsRejected) {
  // B_1 = -1 with small higher terms puts a root of D near x = 1.
  std::vector<Real> free(free_parameter_count(3), Real(0.001, 256));
  free[0] = Real(-1L, 256);
  const RationalCoeffs r = constrain(0, 3, free, kPrec);
  std::vector<Real> grid;
  for (int i = 0; i <= 200; ++i) grid.emplace_back(i * 0.05, 256);
  EXPECT_THROW(relative_error_scan(r, grid, kPrec), FitRejected);
}

TEST(BoysFromQ, NaNForNonPositiveQ) {
  const Real c = refmath::boys_prefactor(0, kPrec);
  EXPECT_TRUE(boys_from_q(0, c, Real(0L, 256), Real(1L, 256)).is_nan());
  EXPECT_TRUE(boys_from_q(0, c, Real(-1L, 256), Real(1L, 256)).is_nan());
  const Real x(2L, 256);
  EXPECT_GE(agree_bits(boys_from_q(3, refmath::boys_prefactor(3, kPrec), refmath::q_of_x(3, x, kPrec), x),
                       refmath::boys_ref(3, x, kPrec)),
            240);
}

TEST(GridSpec, PointsSortedAndCoverTail) {
  GridSpec g;
  g.cutoff = Real(30L, 256);
  g.uniform_points = 64;
  g.tail_points = 32;
  const auto pts = g.points(2);
  ASSERT_EQ(pts.size(), 96u);
  EXPECT_TRUE(pts.front().is_zero());
  for (std::size_t i = 1; i < pts.size(); ++i) EXPECT_LT(pts[i - 1], pts[i]);
  EXPECT_GT(pts.back(), Real(1000L, 256));
  EXPECT_EQ(g.refined(4).points(2).size(), 4 * pts.size());
}
