#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "boys/errors.hpp"
#include "boys/refmath.hpp"

using namespace boys;
using namespace boys::refmath;

namespace {

// -log2 |a/b - 1|, large when they agree.
double agree_bits(const Real& a, const Real& b) {
  const Real d = abs(a / b - 1);
  if (d.is_zero()) return 1e9;
  return -log2(d).to_double();
}

Real R(const char* s, int bits = 256) { return Real::parse(s, bits); }

// n + 1/2
Real half(int n) { return Real(2L * n + 1, 256) / 2; }

// Values from tests/oracles/derive_values.py (mpmath incomplete gamma,
// confirmed by quadrature of the integral).
struct FrozenF {
  int n;
  const char* x;
  const char* f;
};
const FrozenF kFrozenF[] = {
    {0, "0.5", "0.8556243918921488031733046202800450612264"},
    {0, "25", "0.1772453850902790950764921109937813548789"},
    {1, "3.75", "0.05750723242640030533411386968691573394214"},
    {3, "0.125", "0.1296541046600946713064945070210497279922"},
    {5, "12", "0.00002997536284828152910993399706790077762178"},
    {8, "30", "0.000000001952688456435091826450451091637379302908"},
    {12, "7.5", "0.00004623328442227653036077522821883276276565"},
    {16, "64", "4.094186877759240876735123950280431027539e-18"},
    {2, "1e-6", "0.1999998571429126983975469007520251964703"},
    {36, "40", "7.56336296978906643288994202862754549292e-19"},
};

struct FrozenQ {
  int n;
  const char* q_half;  // Q_n(0.5)
  const char* q_20;    // Q_n(20)
};
const FrozenQ kFrozenQ[] = {
    {0, "0.8919047793240134572355585576981574658285", "24.29068006967910339076384745976096557099"},
    {1, "1.365811931479053249009378598457345336467", "16.81087593445222470189742399471859007569"},
    {2, "1.381517043846446133105861281584394264376", "12.74261591661943638455412692884515371311"},
    {3, "1.353619158420978408625107041904816609906", "10.28561116839087743076750516761006652538"},
    {4, "1.323000501480814179099165476521163000672", "8.640559735393279064998073389462666422953"},
    {5, "1.29580781714092073323191664938388227816", "7.46026150014131785954092268751280706752"},
    {6, "1.272573711101661062534646090788493942655", "6.571130169333906465058489941462579823743"},
    {7, "1.252793521695200583443009246545512903977", "5.876779559647920859340299910918169616099"},
    {8, "1.23585126732772552919986888323683434611", "5.319376026475772430482558956782057839355"},
};

// Q_n'(0) by numerical differentiation of Q_n (mpmath).
const char* kFrozenSlope[] = {
    "0.485371256765386426359197266668", "0.433422267213683187521882799038", "0.323407348105282371751349467872",
    "0.253489341997089057690059741515", "0.207190818966803752332284040964", "0.17466996473201521928468810987",
    "0.150703173498149237901290859965", "0.132363085511725231596576133235", "0.117904082026781497736403172173",
};

struct FrozenZ {
  int n;
  int b;
  const char* z;
};
const FrozenZ kFrozenZ[] = {
    {0, 24, "14.6881088081909662083568425191"}, {0, 53, "34.3816261058342057848775277323"},
    {5, 24, "27.8111708447050081329025429455"}, {5, 53, "50.5210005765509257271601721642"},
    {8, 24, "33.7118254771041624525194626152"}, {8, 53, "57.7439625223461699779417383668"},
};

}  // namespace

TEST(Precision, RejectsBelow64Bits) {
  EXPECT_THROW(Precision(63), std::invalid_argument);
  EXPECT_EQ(Precision(64).bits(), 64);
}

TEST(BoysRef, ValuesAtZero) {
  const Precision p(128);
  EXPECT_EQ(boys_ref(0, 0.0, p), Real(1L, 128));
  EXPECT_EQ(boys_ref(3, 0.0, p), Real(1L, 128) / 7);
}

TEST(BoysRef, MatchesIndependentOracle) {
  const Precision p(128);
  for (const auto& v : kFrozenF) {
    const Real x = R(v.x, 128);
    // The frozen digits carry about 130 bits.
    EXPECT_GE(agree_bits(boys_ref(v.n, x, p), R(v.f)), 125) << "n=" << v.n << " x=" << v.x;
  }
}

TEST(BoysRef, BothMethodsMatchOracle) {
  const Precision p(128);
  for (const auto& v : kFrozenF) {
    const Real x = R(v.x, 128);
    EXPECT_GE(agree_bits(boys_ref(v.n, x, p, Method::series), R(v.f)), 125) << v.n << " " << v.x;
    EXPECT_GE(agree_bits(boys_ref(v.n, x, p, Method::incomplete_gamma), R(v.f)), 125) << v.n << " " << v.x;
  }
}

TEST(BoysRef, LongRangeLimitAt25) {
  const Precision p(128);
  const Real x(25L, 128);
  const Real asym = constants(0, p).c / sqrt(x);
  EXPECT_GE(agree_bits(boys_ref(0, x, p), asym), 30);
}

TEST(BoysRef, RejectsBadArguments) {
  const Precision p(128);
  EXPECT_THROW(boys_ref(0, -1.0, p), DomainError);
  EXPECT_THROW(boys_ref(0, std::nan(""), p), DomainError);
  EXPECT_THROW(boys_ref(65, 1.0, p), DomainError);
}

TEST(BoysRef, MethodsAgreeOnLogGrid) {
  const Precision p(192);
  for (int n : {0, 4, 11}) {
    for (int e = -20; e <= 12; e += 2) {
      const Real x = ldexp(Real(3L, 192), e) / 2;
      const Real a = boys_ref(n, x, p, Method::series);
      const Real b = boys_ref(n, x, p, Method::incomplete_gamma);
      EXPECT_GE(agree_bits(a, b), 192 - 12) << "n=" << n << " x=" << x.decimal(8);
    }
  }
}

TEST(BoysRef, DownwardRecursionIdentity) {
  const Precision p(160);
  for (int n = 1; n <= 20; n += 3) {
    for (const char* xs : {"0.001", "0.7", "5", "19.5", "33", "120"}) {
      const Real x = R(xs, 160);
      const Real lhs = (2 * x * boys_ref(n, x, p) + exp(-x)) / (2 * n - 1);
      EXPECT_GE(agree_bits(lhs, boys_ref(n - 1, x, p)), 160 - 10) << n << " " << xs;
    }
  }
}

TEST(BoysRef, DerivativeIsMinusNextOrder) {
  const Precision p(192);
  const Real h = ldexp(Real(1L, 192), -40);
  for (int n : {0, 3, 9}) {
    for (const char* xs : {"0.5", "4", "27"}) {
      const Real x = R(xs, 192);
      const Real d = (boys_ref(n, x + h, p) - boys_ref(n, x - h, p)) / (2 * h);
      EXPECT_GE(agree_bits(-d, boys_ref(n + 1, x, p)), 40) << n << " " << xs;
    }
  }
}

TEST(BoysRef, BoundsAndMonotonicity) {
  const Precision p(96);
  for (int n = 0; n <= 10; ++n) {
    Real prev(1L, 96);
    prev /= 2 * n + 1;
    for (double x : {0.01, 0.5, 2.0, 9.0, 30.0, 80.0}) {
      const Real f = boys_ref(n, x, p);
      EXPECT_GT(f, 0);
      EXPECT_LT(f, prev) << n << " " << x;
      EXPECT_LT(f, boys_ref(n == 0 ? 0 : n - 1, x, p) * (n == 0 ? 2 : 1));
      prev = f;
    }
  }
}

TEST(Constants, ClosedForms) {
  const Precision p(256);
  const auto k0 = constants(0, p);
  EXPECT_GE(agree_bits(k0.c, sqrt(pi(256)) / 2), 250);
  EXPECT_GE(agree_bits(k0.q0, pow(k0.c, 4L)), 250);
  const auto k1 = constants(1, p);
  EXPECT_GE(agree_bits(k1.beta, k1.alpha / 3), 250);
  for (int n = 0; n <= 36; ++n) {
    const auto k = constants(n, p);
    EXPECT_GT(k.c, 0);
    EXPECT_GT(k.alpha, 0);
    EXPECT_GT(k.q0, 0);
    if (n > 0) {
      EXPECT_GE(agree_bits(k.beta, k.alpha * (2 * n - 1) / (2 * n + 1)), 250);
    }
  }
}

TEST(Constants, SlopeAtZeroMatchesNumericalDerivative) {
  const Precision p(256);
  for (int n = 0; n <= 8; ++n) {
    EXPECT_GE(agree_bits(constants(n, p).q1, R(kFrozenSlope[n])), 95) << n;
  }
}

TEST(Constants, CPrefactorFactorialForm) {
  // c_n = (2n)! sqrt(pi) / (n! 2^(2n+1))
  const Precision p(256);
  for (int n = 0; n <= 20; ++n) {
    Real num = sqrt(pi(256));
    for (int k = n + 1; k <= 2 * n; ++k) num *= k;
    EXPECT_GE(agree_bits(boys_prefactor(n, p), ldexp(num, -(2 * n + 1))), 250) << n;
  }
}

TEST(QOfX, MatchesIndependentOracle) {
  const Precision p(192);
  for (const auto& v : kFrozenQ) {
    EXPECT_GE(agree_bits(q_of_x(v.n, Real(0.5, 192), p), R(v.q_half)), 125) << v.n;
    EXPECT_GE(agree_bits(q_of_x(v.n, Real(20L, 192), p), R(v.q_20)), 125) << v.n;
  }
}

TEST(QOfX, ValueAndSlopeAtZero) {
  const Precision p(256);
  for (int n = 0; n <= 8; ++n) {
    const auto k = constants(n, p);
    EXPECT_GE(agree_bits(q_of_x(n, Real(0L, 256), p), k.q0), 256 - 8) << n;
    // One Richardson step on forward differences.
    const Real q0 = q_of_x(n, Real(0L, 256), p);
    const Real h = ldexp(Real(1L, 256), -90);
    const Real d1 = (q_of_x(n, h, p) - q0) / h;
    const Real d2 = (q_of_x(n, h / 2, p) - q0) / (h / 2);
    const Real slope = d2 * 2 - d1;
    EXPECT_GE(agree_bits(slope, k.q1), 128) << n;
  }
}

TEST(QOfX, RoundTripThroughClosedForm) {
  const Precision p(192);
  for (int n : {0, 2, 7, 15}) {
    const Real c = constants(n, p).c;
    const Real a = half(n);
    for (const char* xs : {"0", "0.3", "6", "25", "90", "700"}) {
      const Real x = R(xs, 192);
      const Real q = q_of_x(n, x, p);
      const Real f = c / pow(x + pow(q, a) * exp(-x), a);
      EXPECT_GE(agree_bits(f, boys_ref(n, x, p)), 192 - 10) << n << " " << xs;
    }
  }
}

TEST(QOfX, LargeXAsymptote) {
  const Precision p(256);
  const auto k = constants(0, p);
  // Slope and intercept from samples at 100, 200, 400: Q = alpha x + beta + C/x + ...
  const Real q1 = q_of_x(0, Real(100L, 256), p);
  const Real q2 = q_of_x(0, Real(200L, 256), p);
  const Real q4 = q_of_x(0, Real(400L, 256), p);
  const Real slope = (q4 - q2) / 200;
  EXPECT_LT(abs(slope / k.alpha - 1), 1e-4);
  const Real intercept = 2 * (q4 - k.alpha * 400) - (q2 - k.alpha * 200);
  EXPECT_LT(abs(intercept - k.beta), 1e-3);
  EXPECT_GT(q1, 0);
}

// e^{-x} here is far below the default MPFR exponent range.
TEST(QOfX, HugeArgumentStaysOnAsymptote) {
  const Precision p(128);
  for (int n : {0, 6}) {
    const auto k = constants(n, p);
    const Real x = ldexp(Real(1L, 128), 31);
    EXPECT_GE(agree_bits(q_of_x(n, x, p), k.alpha * x + k.beta), 50) << n;
  }
}

TEST(QGrid, EmptyAndSingle) {
  const Precision p(128);
  EXPECT_TRUE(q_grid(0, {}, p).empty());
  const std::vector<Real> xs{Real(0L, 128)};
  const auto g = q_grid(0, xs, p);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].f, Real(1L, 128));
  EXPECT_GE(agree_bits(g[0].q, constants(0, p).q0), 120);
}

TEST(QGrid, MonotoneColumn) {
  const Precision p(128);
  std::vector<Real> xs;
  for (int i = 0; i < 16; ++i) xs.push_back(Real(32L * i, 128) / 15);
  const auto g = q_grid(2, xs, p);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i].q, g[i - 1].q);
  for (const auto& r : g) {
    EXPECT_GT(r.f, 0);
    EXPECT_LE(r.f, Real(1L, 128) / 5);
    const Real back = constants(2, p).c / pow(r.x + pow(r.q, half(2)) * exp(-r.x), half(2));
    EXPECT_GE(agree_bits(back, r.f), 110);
  }
}

TEST(Cutoff, MatchesIndependentOracle) {
  const Precision p(192);
  for (const auto& v : kFrozenZ) {
    EXPECT_GE(agree_bits(cutoff_solve(v.n, v.b, p), R(v.z)), 95) << v.n << " " << v.b;
  }
}

TEST(Cutoff, ResidualMonotoneAndTail) {
  const Precision p(192);
  for (int n : {0, 3, 8, 20}) {
    const Real z24 = cutoff_solve(n, 24, p);
    const Real z53 = cutoff_solve(n, 53, p);
    EXPECT_LT(z24, z53);
    for (int b : {24, 53}) {
      const Real z = b == 24 ? z24 : z53;
      const Real c = constants(n, p).c;
      const Real lhs = exp(half(n) * log(z)) / c * boys_ref(n, z, p);
      const Real target = 1 - ldexp(Real(1L, 192), -b);
      EXPECT_LT(abs(lhs - target), ldexp(Real(1L, 192), -(192 - 16)));
      const Real x2 = 2 * z;
      const Real rel = abs(c / exp(half(n) * log(x2)) / boys_ref(n, x2, p) - 1);
      EXPECT_LT(rel, ldexp(Real(1L, 192), -b));
    }
  }
}

TEST(CutoffTable, InsertFindAndOrder) {
  const Precision p(128);
  const std::vector<int> ns{2, 0, 1};
  const std::vector<int> bs{53, 24};
  CutoffTable t = tabulate_cutoffs(ns, bs, p);
  ASSERT_EQ(t.entries().size(), 6u);
  for (std::size_t i = 1; i < t.entries().size(); ++i) {
    const auto& a = t.entries()[i - 1];
    const auto& b = t.entries()[i];
    EXPECT_TRUE(a.n < b.n || (a.n == b.n && a.b < b.b));
  }
  ASSERT_NE(t.find(1, 24), nullptr);
  EXPECT_EQ(t.find(3, 24), nullptr);
  const Real z = t.at(1, 24);
  t.insert(CutoffEntry{1, 24, z});
  EXPECT_EQ(t.entries().size(), 6u);
}

TEST(Fig1Samples, ZeroColumnSlopeAndRows) {
  const Precision p(128);
  std::vector<Real> xs;
  for (int i = 0; i <= 8; ++i) xs.push_back(Real(8L * i, 128));
  xs.push_back(Real(65L, 128));
  const auto s = fig1_samples(8, xs, p);
  ASSERT_EQ(s.rows.size(), xs.size());
  for (int n = 0; n <= 8; ++n) {
    EXPECT_GE(agree_bits(s.rows[0][n], constants(n, p).q0), 120);
    const Real slope = s.rows[9][n] - s.rows[8][n];
    EXPECT_LT(abs(slope / constants(n, p).alpha - 1), 0.05) << n;
  }
  std::ostringstream os;
  write_tsv(os, s, p);
  std::istringstream is(os.str());
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#') ++lines;
  }
  EXPECT_EQ(lines, 10);
}
