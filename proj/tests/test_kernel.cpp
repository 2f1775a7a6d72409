#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

#include "boys/coeffs.hpp"
#include "boys/kernel.hpp"

using namespace boys;
using namespace boys::kernel;

namespace {

const std::filesystem::path kData(BOYS_DATA_DIR);
const refmath::Precision kPrec(256);

template <class T>
KernelTable<T> merged(const char* low, const char* high) {
  KernelTable<T> t = coeffs::build_kernel_table<T>(coeffs::load(kData / low));
  const KernelTable<T> upper = coeffs::build_kernel_table<T>(coeffs::load(kData / high));
  for (const auto& [n, row] : upper.rows()) t.insert(row);
  return t;
}

struct Fixture {
  coeffs::Dataset ds_double = coeffs::load(kData / "boys_double53.dat");
  coeffs::Dataset ds_single = coeffs::load(kData / "boys_single24.dat");
  KernelTable<double> d = coeffs::build_kernel_table<double>(ds_double);
  KernelTable<float> f = coeffs::build_kernel_table<float>(ds_single);
  // n = 0..36
  KernelTable<double> d_all = merged<double>("boys_double53.dat", "boys_double53_high.dat");
  KernelTable<float> f_all = merged<float>("boys_single24.dat", "boys_single24_high.dat");
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

template <class T>
double rel_error(T approx, const Real& ref) {
  return (abs(Real(static_cast<double>(approx), 256) - ref) / ref).to_double();
}

double ulp_units(double approx, const Real& ref) { return rel_error(approx, ref) / std::ldexp(1.0, -53); }

std::vector<double> random_points(std::size_t count, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, hi);
  std::vector<double> xs(count);
  for (auto& x : xs) x = u(rng);
  return xs;
}

}  // namespace

TEST(Ipow, MatchesRepeatedMultiplicationForSmallPowers) {
  EXPECT_EQ(ipow(2.0, 0), 1.0);
  EXPECT_EQ(ipow(3.0, 5), 243.0);
  EXPECT_EQ(ipow(0.5f, 3), 0.125f);
  EXPECT_EQ(ipow(1.5, 10), std::pow(1.5, 10));
}

TEST(Qtilde, ValueAtZeroIsQ0) {
  for (const auto& [n, row] : fx().d.rows()) EXPECT_EQ(eval_qtilde(row, 0.0), row.q0);
  for (const auto& [n, row] : fx().f.rows()) EXPECT_EQ(eval_qtilde(row, 0.0f), row.q0);
}

TEST(Qtilde, FollowsLinearAsymptote) {
  for (const auto& [n, row] : fx().d.rows()) {
    const auto k = refmath::constants(n, kPrec);
    const double x = 1e6;
    const double expect = (k.alpha * Real(x, 256) + k.beta).to_double();
    EXPECT_NEAR(eval_qtilde(row, x) / expect, 1.0, 1e-9) << n;
  }
}

TEST(Qtilde, DoubleMatchesHighPrecisionForm) {
  const auto xs = random_points(500, 40.0, 1);
  for (const auto& [n, row] : fx().d.rows()) {
    const auto& sol = fx().ds_double.at(n);
    double worst = 0;
    for (double x : xs) {
      if (!(x < row.z)) continue;
      worst = std::max(worst, rel_error(eval_qtilde(row, x), sol.factored.value(Real(x, 256))));
    }
    EXPECT_GE(-std::log2(worst), 46) << n;
  }
}

TEST(EvalFn, ValuesAtZero) {
  // Within one ulp of 1.
  EXPECT_LE(std::abs(eval_fn(0, 0.0, fx().d).fn - 1.0), std::numeric_limits<double>::epsilon());
  EXPECT_LE(std::abs(eval_fn(0, 0.0f, fx().f).fn - 1.0f), std::numeric_limits<float>::epsilon());
  // Below the top order x = 0 gives F_{m-1} = 1 / (2m - 1) in one rounding.
  for (const auto& [n, row] : fx().d.rows()) {
    const auto vals = eval_batch<double>({n, std::vector<double>{0.0}, Layout::order_major}, fx().d);
    for (int m = 0; m < n; ++m) EXPECT_EQ(vals.at(m, 0), 1.0 / (2 * m + 1)) << n << " " << m;
    EXPECT_NEAR(vals.at(n, 0) * (2 * n + 1), 1.0, std::ldexp(1.0, -44)) << n;
  }
}

TEST(Recursion, ExactLadderAtZero) {
  for (int n : {0, 1, 8, 36}) {
    const auto d = recursion_fill(n, 1.0 / (2 * n + 1), 1.0, 0.0);
    const auto f = recursion_fill(n, 1.0f / static_cast<float>(2 * n + 1), 1.0f, 0.0f);
    for (int m = 0; m <= n; ++m) {
      EXPECT_EQ(d[m], 1.0 / (2 * m + 1));
      EXPECT_EQ(f[m], 1.0f / static_cast<float>(2 * m + 1));
    }
  }
}

TEST(EvalFn, AsymptoticBranchBeyondCutoff) {
  const auto& row = fx().d.row(2);
  const double x = 1e9;
  const Real ref = refmath::boys_prefactor(2, kPrec) / pow(Real(x, 256), Real(2.5, 256));
  EXPECT_LE(ulp_units(eval_fn(row, x).fn, ref), 1);
  EXPECT_EQ(eval_fn(row, x).expx, 0.0);
  // At and past z the asymptote is used.
  const double z = row.z;
  const Real zr(z, 256);
  EXPECT_LE(ulp_units(eval_fn(row, z).fn, refmath::boys_prefactor(2, kPrec) / pow(zr, Real(2.5, 256))), 1);
}

TEST(EvalFn, RejectsBadArguments) {
  const auto& row = fx().d.row(0);
  EXPECT_THROW(eval_fn(row, -1.0), DomainError);
  EXPECT_THROW(eval_fn(row, std::nan("")), DomainError);
  EXPECT_THROW(eval_fn(row, HUGE_VAL), DomainError);
  EXPECT_THROW(eval_fn(20, 1.0, fx().d), MissingOrder);
  EXPECT_NO_THROW(eval_fn(row, std::numeric_limits<double>::max()));
}

TEST(EvalFn, PositiveBoundedAndDecreasingInOrder) {
  std::vector<double> xs = random_points(2000, 60.0, 2);
  for (double x : {0.0, 1e-300, 1e-8, 100.0, 1e6, 1e30}) xs.push_back(x);
  const auto res = eval_batch<double>({8, xs, Layout::point_major}, fx().d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int m = 0; m <= 8; ++m) {
      EXPECT_GT(res.at(m, i), 0.0) << xs[i];
      EXPECT_LE(res.at(m, i), 1.0 / (2 * m + 1)) << xs[i];
      if (m > 0 && xs[i] > 0) {
        EXPECT_LT(res.at(m, i), res.at(m - 1, i)) << xs[i];
      }
    }
  }
}

// The outputs satisfy the downward recursion up to the rounding of one step.
TEST(Recursion, OutputsAreConsistent) {
  std::vector<double> xs = random_points(500, 60.0, 12);
  xs.push_back(0.0);
  const auto res = eval_batch<double>({8, xs, Layout::point_major}, fx().d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Real x(xs[i], 256);
    const Real e(res.expx[i], 256);
    for (int m = 1; m <= 8; ++m) {
      const Real step = (2 * x * Real(res.at(m, i), 256) + e) / (2 * m - 1);
      EXPECT_LE(ulp_units(res.at(m - 1, i), step), 4) << xs[i] << " " << m;
    }
  }
}

TEST(Batch, BitIdenticalToScalar) {
  const auto xs = random_points(1000, 50.0, 3);
  for (int n : {0, 3, 8}) {
    const auto res = eval_batch<double>({n, xs, Layout::order_major}, fx().d);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto v = eval_fn(n, xs[i], fx().d);
      const auto all = recursion_fill(n, v.fn, v.expx, xs[i]);
      EXPECT_EQ(res.expx[i], v.expx);
      for (int m = 0; m <= n; ++m) ASSERT_EQ(res.at(m, i), all[m]) << n << " " << m << " " << xs[i];
    }
  }
}

TEST(Batch, LayoutsAgree) {
  const auto xs = random_points(300, 50.0, 4);
  const auto a = eval_batch<float>({6, std::vector<float>(xs.begin(), xs.end()), Layout::order_major}, fx().f);
  const auto b = eval_batch<float>({6, std::vector<float>(xs.begin(), xs.end()), Layout::point_major}, fx().f);
  ASSERT_EQ(a.values.size(), 7 * xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int m = 0; m <= 6; ++m) EXPECT_EQ(a.at(m, i), b.at(m, i));
  }
  EXPECT_EQ(a.values[2 * xs.size() + 5], a.at(2, 5));
  EXPECT_EQ(b.values[5 * 7 + 2], b.at(2, 5));
}

TEST(Batch, OrderOfPointsDoesNotMatter) {
  std::vector<double> xs = random_points(400, 45.0, 5);
  std::vector<std::size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(9));
  std::vector<double> shuffled(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) shuffled[i] = xs[perm[i]];
  const auto a = eval_batch<double>({5, xs, Layout::point_major}, fx().d);
  const auto b = eval_batch<double>({5, shuffled, Layout::point_major}, fx().d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int m = 0; m <= 5; ++m) EXPECT_EQ(b.at(m, i), a.at(m, perm[i]));
  }
}

TEST(Batch, ReportsEveryBadIndex) {
  const std::vector<double> xs = {1.0, -2.0, 3.0, std::nan(""), 5.0, HUGE_VAL};
  try {
    eval_batch<double>({2, xs, Layout::order_major}, fx().d);
    FAIL() << "expected BatchDomainError";
  } catch (const BatchDomainError& e) {
    EXPECT_EQ(e.indices(), (std::vector<std::size_t>{1, 3, 5}));
  }
  EXPECT_THROW(eval_batch<double>({20, std::vector<double>{1.0}, Layout::order_major}, fx().d), MissingOrder);
  const auto empty = eval_batch<double>({3, {}, Layout::order_major}, fx().d);
  EXPECT_EQ(empty.points, 0u);
  EXPECT_TRUE(empty.values.empty());
}

TEST(Split, UpperAndLowerSegmentsUseTheirSeeds) {
  const auto xs = random_points(200, 40.0, 6);
  for (int nbar : {0, 3, 7}) {
    for (double x : xs) {
      const auto s = eval_with_split(8, nbar, x, fx().d);
      ASSERT_EQ(s.size(), 9u);
      const auto top = eval_fn(8, x, fx().d);
      const auto upper = recursion_fill(8, top.fn, top.expx, x);
      const auto low = eval_fn(nbar, x, fx().d);
      const auto lower = recursion_fill(nbar, low.fn, low.expx, x);
      for (int m = 0; m <= 8; ++m) EXPECT_EQ(s[m], m > nbar ? upper[m] : lower[m]) << nbar << " " << m;
    }
  }
}

TEST(Split, AdjacentSplitMatchesDirectEvaluation) {
  for (double x : random_points(100, 40.0, 13)) {
    const auto s = eval_with_split(6, 5, x, fx().d);
    const auto v = eval_fn(5, x, fx().d);
    const auto direct = recursion_fill(5, v.fn, v.expx, x);
    for (int m = 0; m <= 5; ++m) EXPECT_EQ(s[m], direct[m]);
  }
  const auto zero = eval_with_split(8, 3, 0.0, fx().d);
  for (int m = 0; m < 8; ++m) {
    if (m != 3) {
      EXPECT_EQ(zero[m], 1.0 / (2 * m + 1)) << m;
    }
  }
}

// -log2 of the worst relative error of F_lo..F_hi over xs.
template <class T, class Eval>
double worst_error(std::span<const double> xs, int n, int lo, int hi, Eval&& eval) {
  double worst = 0;
  for (double x : xs) {
    const T xt = static_cast<T>(x);
    const auto ref = refmath::boys_ref_all(n, Real(static_cast<double>(xt), 256), refmath::Precision(128));
    const std::vector<T> vals = eval(xt);
    for (int m = lo; m <= hi; ++m) worst = std::max(worst, rel_error(vals[m], ref[m]));
  }
  return -std::log2(worst);
}

TEST(HighOrder, RecursionFrom36RecoversF0) {
  const double z53 = fx().d_all.row(36).z;
  const double z24 = fx().f_all.row(36).z;
  const auto xs53 = random_points(3000, z53, 15);
  const auto xs24 = random_points(3000, z24, 16);
  const double d = worst_error<double>(xs53, 36, 0, 0, [](double x) {
    const auto v = eval_fn(36, x, fx().d_all);
    return recursion_fill(36, v.fn, v.expx, x);
  });
  const double f = worst_error<float>(xs24, 36, 0, 0, [](float x) {
    const auto v = eval_fn(36, x, fx().f_all);
    return recursion_fill(36, v.fn, v.expx, x);
  });
  EXPECT_GE(d, 46);
  EXPECT_GE(f, 17);
}

// Seeding the low orders from a short recursion beats the long one from 36,
// order by order.
TEST(Split, LowerOrdersAtLeastAsAccurate) {
  const auto xs = random_points(3000, fx().d_all.row(36).z, 14);
  const int nbar = 4;
  for (int m = 0; m <= nbar; ++m) {
    const double split = worst_error<double>(xs, 36, m, m, [&](double x) {
      return eval_with_split(36, nbar, x, fx().d_all);
    });
    const double single = worst_error<double>(xs, 36, m, m, [](double x) {
      const auto v = eval_fn(36, x, fx().d_all);
      return recursion_fill(36, v.fn, v.expx, x);
    });
    EXPECT_GE(split, single) << m;
  }
}

TEST(Split, RejectsBadSplit) {
  EXPECT_THROW(eval_with_split(5, 5, 1.0, fx().d), std::invalid_argument);
  EXPECT_THROW(eval_with_split(5, -1, 1.0, fx().d), std::invalid_argument);
  EXPECT_THROW(eval_with_split(5, 2, -1.0, fx().d), DomainError);
}

TEST(Accuracy, DoubleKernelNearFullPrecision) {
  const auto xs = random_points(400, 40.0, 7);
  for (int n : {0, 4, 8}) {
    const auto res = eval_batch<double>({n, xs, Layout::point_major}, fx().d);
    double worst = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto ref = refmath::boys_ref_all(n, Real(xs[i], 256), refmath::Precision(128));
      for (int m = 0; m <= n; ++m) worst = std::max(worst, rel_error(res.at(m, i), ref[m]));
    }
    EXPECT_GE(-std::log2(worst), 44) << n;
  }
}

TEST(Accuracy, SingleKernelNearFullPrecision) {
  const auto xs = random_points(400, 25.0, 8);
  const std::vector<float> xf(xs.begin(), xs.end());
  const auto res = eval_batch<float>({5, xf, Layout::point_major}, fx().f);
  double worst = 0;
  for (std::size_t i = 0; i < xf.size(); ++i) {
    const auto ref = refmath::boys_ref_all(5, Real(static_cast<double>(xf[i]), 256), refmath::Precision(128));
    for (int m = 0; m <= 5; ++m) worst = std::max(worst, rel_error(res.at(m, i), ref[m]));
  }
  EXPECT_GE(-std::log2(worst), 17);
}
