#include "boys/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "boys/errors.hpp"
#include "boys/linalg.hpp"
#include "boys/polynomial.hpp"

namespace boys::fit {

namespace {

using prec_t = Real::prec_t;

bool same_reals(const std::vector<Real>& a, const std::vector<Real>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].identical(b[i])) return false;
  }
  return true;
}

// A grid abscissa with its reference data.
struct Sample {
  Real x;
  Real expmx;  // e^{-x}
  Real f;      // F_n(x)
};

Sample make_sample(int n, const Real& x, Precision prec) {
  const Real xw(x, prec.mpfr_bits());
  return Sample{xw, exp(-xw), refmath::boys_ref(n, xw, prec)};
}

std::vector<Sample> make_samples(int n, std::span<const Real> xs, Precision prec) {
  std::vector<Sample> out;
  out.reserve(xs.size());
  for (const Real& x : xs) out.push_back(make_sample(n, x, prec));
  return out;
}

Real boys_from_q_expmx(int n, const Real& c, const Real& q, const Real& x, const Real& expmx) {
  if (!(q > 0)) {
    Real nan(q.prec());
    mpfr_set_nan(nan.raw());
    return nan;
  }
  const Real s = pow(q, static_cast<long>(n)) * sqrt(q) * expmx;
  const Real y = x + s;
  return c / (pow(y, static_cast<long>(n)) * sqrt(y));
}

// The derivative columns of P and D with respect to each free parameter.
// P = P0 + sum_j theta_j p_j, D = 1 + sum_j theta_j d_j, P0 = q0 + q1 x.
struct Columns {
  std::vector<Real> p;
  std::vector<Real> d;
};

class Model {
 public:
  Model(int n, int N, Precision prec)
      : n_(n), N_(N), prec_(prec), k_(refmath::constants(n, prec)), p_(Real(2L * n + 1, prec.mpfr_bits()) / 2) {}

  int n() const { return n_; }
  int N() const { return N_; }
  int free_count() const { return free_parameter_count(N_); }
  const refmath::AnalyticConstants& constants() const { return k_; }
  const Real& order() const { return p_; }
  Precision prec() const { return prec_; }

  Columns columns(const Real& x) const {
    std::vector<Real> xp(static_cast<std::size_t>(N_) + 2, Real(1L, prec_.mpfr_bits()));
    for (int k = 1; k <= N_ + 1; ++k) xp[k] = xp[k - 1] * x;
    Columns cols;
    const int k_free = free_count();
    cols.p.assign(k_free, Real(prec_.mpfr_bits()));
    cols.d.assign(k_free, Real(prec_.mpfr_bits()));
    for (int k = 1; k <= N_; ++k) {
      Real dp(prec_.mpfr_bits());
      if (k == 1) dp += k_.q0 * x;
      if (k == N_ - 1) dp += k_.alpha * xp[N_];
      if (k == N_) dp += k_.beta * xp[N_] + k_.alpha * xp[N_ + 1];
      cols.p[k - 1] = dp;
      cols.d[k - 1] = xp[k];
    }
    for (int k = 2; k <= N_ - 1; ++k) cols.p[N_ + k - 2] = xp[k];
    return cols;
  }

  RationalCoeffs coeffs(std::span<const Real> theta) const { return constrain(n_, N_, theta, k_); }

  Real error(const RationalCoeffs& r, const Sample& s) const {
    const Real q = r.value(s.x);
    return boys_from_q_expmx(n_, k_.c, q, s.x, s.expmx) / s.f - 1;
  }

  // d ln F~ / d Q~ at x for the model value q.
  Real log_sensitivity(const Real& q, const Sample& s) const {
    const Real t = pow(q, static_cast<long>(n_)) * sqrt(q) * s.expmx;
    return -(p_ * p_) * t / (q * (s.x + t));
  }

 private:
  int n_;
  int N_;
  Precision prec_;
  refmath::AnalyticConstants k_;
  Real p_;
};

struct Curve {
  bool valid = false;
  std::vector<Real> e;
  Real max_abs;
};

Curve evaluate_curve(const Model& model, const RationalCoeffs& r, const std::vector<Sample>& samples) {
  Curve c;
  c.max_abs = Real(0L, model.prec().mpfr_bits());
  c.e.reserve(samples.size());
  for (const Sample& s : samples) {
    if (!(r.denominator(s.x) > 0)) return c;
    Real e = model.error(r, s);
    if (e.is_nan()) return c;
    const Real a = abs(e);
    if (a > c.max_abs) c.max_abs = a;
    c.e.push_back(std::move(e));
  }
  c.valid = true;
  return c;
}

struct Point {
  Sample s;
  Real e;
};

// Golden-section maximisation of |e| on [lo, hi] around a grid extremum,
// keeping the sign of the grid value.
Point refine_extremum(const Model& model, const RationalCoeffs& r, const Sample& lo, const Sample& mid,
                      const Sample& hi, const Real& e_mid) {
  Point best{mid, e_mid};
  Real a = lo.x;
  Real b = hi.x;
  const Real ratio = (sqrt(Real(5L, model.prec().mpfr_bits())) - 1) / 2;
  auto eval = [&](const Real& x) {
    Sample s = make_sample(model.n(), x, model.prec());
    Real e = model.error(r, s);
    return Point{std::move(s), std::move(e)};
  };
  Point c = eval(b - ratio * (b - a));
  Point d = eval(a + ratio * (b - a));
  for (int it = 0; it < 24; ++it) {
    if (abs(c.e) > abs(d.e)) {
      b = d.s.x;
      d = std::move(c);
      c = eval(b - ratio * (b - a));
    } else {
      a = c.s.x;
      c = std::move(d);
      d = eval(a + ratio * (b - a));
    }
  }
  for (Point* cand : {&c, &d}) {
    if (!cand->e.is_nan() && cand->e.sign() == e_mid.sign() && abs(cand->e) > abs(best.e)) best = *cand;
  }
  return best;
}

// One extremum per maximal run of constant sign, refined off-grid.
std::vector<Point> find_extrema(const Model& model, const RationalCoeffs& r, const std::vector<Sample>& samples,
                                const std::vector<Real>& e) {
  std::vector<Point> out;
  std::size_t i = 0;
  const std::size_t m = samples.size();
  while (i < m) {
    if (e[i].is_zero()) {
      ++i;
      continue;
    }
    const int sign = e[i].sign();
    std::size_t best = i;
    std::size_t j = i;
    while (j < m && (e[j].sign() == sign || e[j].is_zero())) {
      if (abs(e[j]) > abs(e[best])) best = j;
      ++j;
    }
    const std::size_t lo = best > 0 ? best - 1 : best;
    const std::size_t hi = best + 1 < m ? best + 1 : best;
    if (lo != best && hi != best) {
      out.push_back(refine_extremum(model, r, samples[lo], samples[best], samples[hi], e[best]));
    } else {
      out.push_back(Point{samples[best], e[best]});
    }
    i = j;
  }
  return out;
}

// Drops extrema until `count` alternating ones remain, always keeping the
// largest.
void reduce_alternation(std::vector<Point>& pts, std::size_t count) {
  while (pts.size() > count) {
    if (pts.size() - count == 1) {
      if (abs(pts.front().e) < abs(pts.back().e)) {
        pts.erase(pts.begin());
      } else {
        pts.pop_back();
      }
      continue;
    }
    std::size_t k = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (abs(pts[i].e) < abs(pts[k].e)) k = i;
    }
    if (k == 0 || k + 1 == pts.size()) {
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      const std::size_t drop = abs(pts[k - 1].e) < abs(pts[k + 1].e) ? k - 1 : k + 1;
      const std::size_t first = std::min(k, drop);
      pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(first), pts.begin() + static_cast<std::ptrdiff_t>(first) + 2);
    }
  }
}

Real max_abs_error(const std::vector<Point>& pts, const Real& grid_max) {
  Real m = grid_max;
  for (const auto& p : pts) {
    if (abs(p.e) > m) m = abs(p.e);
  }
  return m;
}

double to_bits(const Real& e) { return -log2(e).to_double(); }

class Fitter {
 public:
  Fitter(int n, int N, Precision prec, const FitOptions& options)
      : model_(n, N, prec), options_(options) {
    grid_.target_bits = options.target_bits;
    grid_.uniform_points = options.uniform_points;
    grid_.tail_points = options.tail_points;
    grid_.cutoff = refmath::cutoff_solve(n, std::min(options.target_bits + 8, prec.bits() - 16), prec);
    const std::vector<Real> xs = grid_.points(n);
    const std::vector<refmath::ReferencePoint> ref = refmath::q_grid(n, xs, prec);
    const Real& p = model_.order();
    for (const auto& rp : ref) {
      samples_.push_back(Sample{rp.x, exp(-rp.x), rp.f});
      // w = p^2 d / (x + d), d = Q^p e^{-x}; LSQ weight w / Q
      const Real d = exp(p * log(rp.q) - rp.x);
      q_.push_back(rp.q);
      weight_.push_back(p * p * d / ((rp.x + d) * rp.q));
    }
  }

  ApproxSolution run() {
    lawson();
    if (best_theta_.empty()) throw NoSolution("no pole-free initial approximation found");
    exchange();
    if (!converged_) {
      throw NoSolution("n=" + std::to_string(model_.n()) + " N=" + std::to_string(model_.N()) +
                       ": extrema did not level to 1% within " + std::to_string(options_.max_exchange) +
                       " exchange steps");
    }
    return finish();
  }

 private:
  std::size_t rows() const { return samples_.size(); }

  void consider(const std::vector<Real>& theta, const Real& error) {
    if (best_theta_.empty() || error < best_error_) {
      best_theta_ = theta;
      best_error_ = error;
    }
  }

  void lawson() {
    const std::size_t m = rows();
    const int k = model_.free_count();
    const prec_t bits = model_.prec().mpfr_bits();
    std::vector<Columns> cols;
    cols.reserve(m);
    for (const Sample& s : samples_) cols.push_back(model_.columns(s.x));

    std::vector<Real> lambda(m, Real(1L, bits));
    std::vector<Real> dprev(m, Real(1L, bits));
    std::vector<double> history;
    for (int it = 0; it < options_.max_lawson; ++it) {
      linalg::Matrix a(m, static_cast<std::size_t>(k), bits);
      std::vector<Real> rhs(m, Real(bits));
      for (std::size_t i = 0; i < m; ++i) {
        const Sample& s = samples_[i];
        const Real scale = weight_[i] * sqrt(lambda[i]) / dprev[i];
        for (int j = 0; j < k; ++j) a(i, j) = scale * (cols[i].p[j] - q_[i] * cols[i].d[j]);
        rhs[i] = -scale * (model_.constants().q0 + model_.constants().q1 * s.x - q_[i]);
      }
      std::vector<Real> theta;
      try {
        theta = linalg::least_squares(std::move(a), std::move(rhs));
      } catch (const std::runtime_error&) {
        break;
      }
      const RationalCoeffs r = model_.coeffs(theta);
      const Curve curve = evaluate_curve(model_, r, samples_);
      if (!curve.valid) {
        // The linearisation wandered into a pole; restart the weights.
        for (auto& l : lambda) l = Real(1L, bits);
        for (auto& d : dprev) d = Real(1L, bits);
        if (it > 10) break;
        continue;
      }
      consider(theta, curve.max_abs);
      history.push_back(to_bits(curve.max_abs));
      for (std::size_t i = 0; i < m; ++i) dprev[i] = r.denominator(samples_[i].x);
      if (it >= 3) {
        Real total(bits);
        for (std::size_t i = 0; i < m; ++i) {
          lambda[i] *= abs(curve.e[i]);
          total += lambda[i];
        }
        if (total.is_zero()) break;
        for (auto& l : lambda) l /= total;
      }
      const std::size_t h = history.size();
      if (h >= 12 && std::fabs(history[h - 1] - history[h - 5]) < 2e-4) break;
    }
  }

  // Newton iteration on the equioscillation conditions e(x_i) = (-1)^i h,
  // alternated with relocating the reference onto the current extrema.
  void exchange() {
    const std::size_t count = static_cast<std::size_t>(model_.free_count()) + 1;
    const int k = model_.free_count();
    const prec_t bits = model_.prec().mpfr_bits();
    std::vector<Real> theta = best_theta_;
    RationalCoeffs r = model_.coeffs(theta);
    Curve curve = evaluate_curve(model_, r, samples_);
    std::vector<Point> ref = find_extrema(model_, r, samples_, curve.e);
    best_error_ = max_abs_error(ref, curve.max_abs);
    best_extrema_ = ref;

    for (int outer = 0; outer < options_.max_exchange; ++outer) {
      if (ref.size() < count) return;
      reduce_alternation(ref, count);
      if (levels_agree(ref, best_error_)) {
        converged_ = true;
        return;
      }

      Real h(bits);
      for (const auto& pt : ref) h += abs(pt.e);
      h /= static_cast<long>(count);
      const int sign0 = ref.front().e.sign();

      std::vector<Real> trial = theta;
      bool ok = true;
      for (int newton = 0; newton < 4 && ok; ++newton) {
        const RationalCoeffs rt = model_.coeffs(trial);
        linalg::Matrix jac(count, count, bits);
        std::vector<Real> rhs(count, Real(bits));
        for (std::size_t i = 0; i < count; ++i) {
          const Sample& s = ref[i].s;
          const Real q = rt.value(s.x);
          const Real e = model_.error(rt, s);
          if (e.is_nan()) {
            ok = false;
            break;
          }
          const Real g = (1 + e) * model_.log_sensitivity(q, s) / rt.denominator(s.x);
          const Columns c = model_.columns(s.x);
          for (int j = 0; j < k; ++j) jac(i, j) = g * (c.p[j] - q * c.d[j]);
          const long sigma = ((i % 2 == 0) == (sign0 > 0)) ? 1 : -1;
          jac(i, static_cast<std::size_t>(k)) = Real(-sigma, bits);
          rhs[i] = -(e - sigma * h);
        }
        if (!ok) break;
        std::vector<Real> delta;
        try {
          delta = linalg::solve(std::move(jac), std::move(rhs));
        } catch (const std::runtime_error&) {
          ok = false;
          break;
        }
        for (int j = 0; j < k; ++j) trial[j] += delta[j];
        h += delta[k];
      }
      if (!ok) return;

      RationalCoeffs rt = model_.coeffs(trial);
      Curve ct = evaluate_curve(model_, rt, samples_);
      if (!ct.valid) return;
      std::vector<Point> next = find_extrema(model_, rt, samples_, ct.e);
      const Real err = max_abs_error(next, ct.max_abs);
      if (err > 2 * best_error_) return;
      theta = std::move(trial);
      ref = std::move(next);
      if (err < best_error_) {
        best_error_ = err;
        best_theta_ = theta;
        best_extrema_ = ref;
      }
    }
  }

  static bool levels_agree(const std::vector<Point>& ref, const Real& global) {
    Real lo = abs(ref.front().e);
    for (const auto& pt : ref) lo = min(lo, abs(pt.e));
    return (global - lo) <= global / 100;
  }

  ApproxSolution finish() {
    const Precision prec = model_.prec();
    RationalCoeffs r = model_.coeffs(best_theta_);
    if (!(r.B.back() > 0)) {
      throw FitRejected("n=" + std::to_string(model_.n()) + " N=" + std::to_string(model_.N()) +
                        ": leading denominator coefficient B_N is not positive");
    }
    RootFactoredForm f = factorize(r, prec, options_.gather);
    for (const Real& z : f.v_lins) {
      if (!(z < 0)) {
        throw FitRejected("n=" + std::to_string(model_.n()) + " N=" + std::to_string(model_.N()) +
                          ": denominator has a root on [0, inf)");
      }
    }
    ApproxSolution sol;
    sol.exact_error_bits = to_bits(best_error_);
    sol.rational = std::move(r);
    sol.factored = std::move(f);
    sol.grid = grid_;
    sol.prec_bits = prec.bits();
    return sol;
  }

  Model model_;
  FitOptions options_;
  GridSpec grid_;
  std::vector<Sample> samples_;
  std::vector<Real> q_;
  std::vector<Real> weight_;
  std::vector<Real> best_theta_;
  Real best_error_;
  std::vector<Point> best_extrema_;
  bool converged_ = false;
};

Real product_value(const std::vector<QuadraticFactor>& quads, const std::vector<Real>& lins,
                   const std::vector<Real>& gathered, const Real& x) {
  Real acc(1L, x.prec());
  for (const auto& q : quads) {
    const Real d = x - q.center;
    acc *= d * d + q.offset;
  }
  for (const Real& y : lins) acc *= x - y;
  if (!gathered.empty()) {
    Real g(1L, x.prec());
    for (std::size_t k = gathered.size(); k-- > 0;) {
      g *= x;
      g += gathered[k];
    }
    acc *= g;
  }
  return acc;
}

struct Factors {
  std::vector<QuadraticFactor> quads;
  std::vector<Real> lins;
  std::vector<Real> gathered;
};

std::vector<Real> expand(const Factors& f, prec_t bits) {
  std::vector<Real> acc{Real(1L, bits)};
  for (const auto& q : f.quads) {
    const std::vector<Real> quad{q.center * q.center + q.offset, -2 * q.center, Real(1L, bits)};
    acc = poly::multiply(acc, quad);
  }
  for (const Real& y : f.lins) {
    const std::vector<Real> lin{-y, Real(1L, bits)};
    acc = poly::multiply(acc, lin);
  }
  if (!f.gathered.empty()) {
    std::vector<Real> g = f.gathered;
    g.emplace_back(1L, bits);
    acc = poly::multiply(acc, g);
  }
  return acc;
}

Factors factor_monic(const std::vector<Real>& monic, prec_t bits, bool gather) {
  Factors out;
  if (monic.size() < 2) return out;
  const std::vector<poly::Complex> rs = poly::roots(monic);
  const Real tiny = ldexp(Real(1L, bits), -static_cast<long>(bits) / 2);
  std::vector<const poly::Complex*> upper, lower;
  for (const auto& z : rs) {
    const Real scale = max(Real(1L, bits), sqrt(z.re * z.re + z.im * z.im));
    if (abs(z.im) <= tiny * scale) {
      out.lins.push_back(z.re);
    } else if (z.im > 0) {
      upper.push_back(&z);
    } else {
      lower.push_back(&z);
    }
  }
  if (upper.size() != lower.size()) throw RootRefinementError("complex roots do not pair into conjugates");
  std::vector<bool> used(lower.size(), false);
  for (const auto* z : upper) {
    std::size_t best = lower.size();
    Real best_dist(bits);
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (used[j]) continue;
      const Real dr = z->re - lower[j]->re;
      const Real di = z->im + lower[j]->im;
      const Real dist = dr * dr + di * di;
      if (best == lower.size() || dist < best_dist) {
        best = j;
        best_dist = dist;
      }
    }
    used[best] = true;
    const Real im = (z->im - lower[best]->im) / 2;
    out.quads.push_back(QuadraticFactor{(z->re + lower[best]->re) / 2, im * im});
  }
  std::sort(out.quads.begin(), out.quads.end(),
            [](const QuadraticFactor& a, const QuadraticFactor& b) { return a.center < b.center; });
  std::sort(out.lins.begin(), out.lins.end());

  const std::vector<Real> back = expand(out, bits);
  Real norm(bits), diff(bits);
  for (std::size_t k = 0; k < monic.size(); ++k) {
    norm = max(norm, abs(monic[k]));
    diff = max(diff, abs(back[k] - monic[k]));
  }
  if (diff > norm * tiny) throw RootRefinementError("factors do not reproduce the polynomial");

  if (gather) {
    Factors neg;
    Factors keep;
    for (auto& q : out.quads) (q.center < 0 ? neg.quads : keep.quads).push_back(q);
    for (auto& y : out.lins) (y < 0 ? neg.lins : keep.lins).push_back(y);
    if (neg.quads.size() + neg.lins.size() >= 2) {
      std::vector<Real> g = expand(neg, bits);
      g.pop_back();
      keep.gathered = std::move(g);
      return keep;
    }
  }
  return out;
}

}  // namespace

Real RationalCoeffs::b(int k) const {
  if (k == 0) return Real(1L, B.empty() ? 64 : B.front().prec());
  return B.at(static_cast<std::size_t>(k - 1));
}

Real RationalCoeffs::numerator(const Real& x) const { return poly::horner(A, x); }

Real RationalCoeffs::denominator(const Real& x) const {
  Real acc(x.prec());
  for (std::size_t k = B.size(); k-- > 0;) {
    acc += B[k];
    acc *= x;
  }
  return acc + 1;
}

bool RationalCoeffs::identical(const RationalCoeffs& o) const {
  return n == o.n && N == o.N && same_reals(A, o.A) && same_reals(B, o.B);
}

RationalCoeffs constrain(int n, int N, std::span<const Real> free, const refmath::AnalyticConstants& k) {
  if (N < 2) throw DomainError("denominator degree N must be >= 2");
  if (static_cast<int>(free.size()) != free_parameter_count(N)) {
    throw std::invalid_argument("constrain: expected " + std::to_string(free_parameter_count(N)) + " free parameters");
  }
  const prec_t bits = k.q0.prec();
  RationalCoeffs r;
  r.n = n;
  r.N = N;
  r.B.reserve(N);
  for (int j = 0; j < N; ++j) r.B.emplace_back(free[j], bits);
  r.A.assign(static_cast<std::size_t>(N) + 2, Real(bits));
  r.A[0] = k.q0;
  r.A[1] = k.q1 + k.q0 * r.B[0];
  for (int j = 2; j <= N - 1; ++j) r.A[j] = Real(free[N + j - 2], bits);
  const Real b_prev = N >= 2 ? r.b(N - 1) : Real(1L, bits);
  r.A[N] = k.beta * r.B[N - 1] + k.alpha * b_prev;
  r.A[N + 1] = k.alpha * r.B[N - 1];
  return r;
}

RationalCoeffs constrain(int n, int N, std::span<const Real> free, Precision prec) {
  return constrain(n, N, free, refmath::constants(n, prec));
}

int RootFactoredForm::u_degree() const {
  return static_cast<int>(2 * u_quads.size() + u_lins.size() + u_gathered.size());
}

int RootFactoredForm::v_degree() const {
  return static_cast<int>(2 * v_quads.size() + v_lins.size() + v_gathered.size());
}

Real RootFactoredForm::u(const Real& x) const { return product_value(u_quads, u_lins, u_gathered, x); }
Real RootFactoredForm::v(const Real& x) const { return product_value(v_quads, v_lins, v_gathered, x); }

Real RootFactoredForm::value(const Real& x) const { return q0 + q1 * x + q2 * (x * x) * (u(x) / v(x)); }

bool RootFactoredForm::identical(const RootFactoredForm& o) const {
  auto same_quads = [](const std::vector<QuadraticFactor>& a, const std::vector<QuadraticFactor>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].center.identical(b[i].center) || !a[i].offset.identical(b[i].offset)) return false;
    }
    return true;
  };
  return n == o.n && N == o.N && q0.identical(o.q0) && q1.identical(o.q1) && q2.identical(o.q2) &&
         same_quads(u_quads, o.u_quads) && same_reals(u_lins, o.u_lins) && same_quads(v_quads, o.v_quads) &&
         same_reals(v_lins, o.v_lins) && same_reals(u_gathered, o.u_gathered) && same_reals(v_gathered, o.v_gathered);
}

std::vector<Real> GridSpec::points(int n) const {
  const prec_t bits = cutoff.prec();
  std::vector<Real> xs;
  xs.reserve(static_cast<std::size_t>(uniform_points + tail_points));
  for (int i = 0; i < uniform_points; ++i) xs.push_back(cutoff * i / (uniform_points - 1));
  const Real shift(static_cast<long>(n) + 1, bits);
  const Real t0 = cutoff / (cutoff + shift);
  for (int j = 0; j < tail_points; ++j) {
    const Real t = t0 + (1 - t0) * (j + 1) / (tail_points + 1);
    xs.push_back(shift * t / (1 - t));
  }
  return xs;
}

GridSpec GridSpec::refined(int factor) const {
  GridSpec g = *this;
  g.uniform_points = uniform_points * factor;
  g.tail_points = tail_points * factor;
  return g;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os << "uniform=" << uniform_points << " tail=" << tail_points << " target=" << target_bits
     << " z=" << cutoff.decimal(20);
  return os.str();
}

bool GridSpec::identical(const GridSpec& o) const {
  return target_bits == o.target_bits && cutoff.identical(o.cutoff) && uniform_points == o.uniform_points &&
         tail_points == o.tail_points;
}

bool ApproxSolution::identical(const ApproxSolution& o) const {
  return rational.identical(o.rational) && factored.identical(o.factored) &&
         exact_error_bits == o.exact_error_bits && grid.identical(o.grid) && prec_bits == o.prec_bits;
}

Real boys_from_q(int n, const Real& c, const Real& q, const Real& x) {
  return boys_from_q_expmx(n, c, q, x, exp(-x));
}

double ErrorScan::bits() const { return to_bits(max_error); }

ErrorScan relative_error_scan(const RationalCoeffs& r, std::span<const Real> grid, Precision prec) {
  const Model model(r.n, r.N, prec);
  ErrorScan out{Real(0L, prec.mpfr_bits()), Real(0L, prec.mpfr_bits())};
  for (const Real& x : grid) {
    const Sample s = make_sample(r.n, x, prec);
    if (!(r.denominator(s.x) > 0)) {
      throw FitRejected("denominator vanishes inside the grid near x=" + s.x.decimal(12));
    }
    const Real e = abs(model.error(r, s));
    if (e.is_nan()) throw FitRejected("approximation not positive near x=" + s.x.decimal(12));
    if (e > out.max_error) {
      out.max_error = e;
      out.argmax = s.x;
    }
  }
  return out;
}

std::vector<Extremum> alternating_extrema(const RationalCoeffs& r, std::span<const Real> grid, Precision prec) {
  const Model model(r.n, r.N, prec);
  const std::vector<Sample> samples = make_samples(r.n, grid, prec);
  const Curve curve = evaluate_curve(model, r, samples);
  if (!curve.valid) throw FitRejected("approximation invalid on the grid");
  std::vector<Extremum> out;
  for (auto& p : find_extrema(model, r, samples, curve.e)) out.push_back(Extremum{p.s.x, p.e});
  return out;
}

ApproxSolution fit_minimax(int n, int N, Precision prec, const FitOptions& options) {
  if (prec.bits() < 192) throw std::invalid_argument("fit_minimax needs at least 192 bits");
  if (N < 2) throw DomainError("denominator degree N must be >= 2");
  Fitter fitter(n, N, prec, options);
  return fitter.run();
}

RootFactoredForm factorize(const RationalCoeffs& r, Precision prec, bool gather) {
  const prec_t bits = prec.mpfr_bits();
  const refmath::AnalyticConstants k = refmath::constants(r.n, prec);
  const int N = r.N;
  if (!(r.B.back() != 0)) throw RootRefinementError("B_N is zero");

  // R = P - (q0 + q1 x) D; R_0 = R_1 = 0 by the constraints, so u = R / x^2.
  std::vector<Real> d(static_cast<std::size_t>(N) + 1, Real(bits));
  d[0] = Real(1L, bits);
  for (int j = 1; j <= N; ++j) d[j] = Real(r.B[j - 1], bits);
  std::vector<Real> upoly;
  for (int j = 2; j <= N + 1; ++j) {
    Real rj(r.A[j], bits);
    if (j <= N) rj -= k.q0 * d[j];
    rj -= k.q1 * d[j - 1];
    upoly.push_back(std::move(rj));
  }
  const Real ulead = upoly.back();
  for (auto& c : upoly) c /= ulead;
  const Real vlead = d.back();
  for (auto& c : d) c /= vlead;

  RootFactoredForm f;
  f.n = r.n;
  f.N = N;
  f.q0 = k.q0;
  f.q1 = k.q1;
  f.q2 = k.alpha - k.q1;
  Factors fu = factor_monic(upoly, bits, gather);
  Factors fv = factor_monic(d, bits, gather);
  f.u_quads = std::move(fu.quads);
  f.u_lins = std::move(fu.lins);
  f.u_gathered = std::move(fu.gathered);
  f.v_quads = std::move(fv.quads);
  f.v_lins = std::move(fv.lins);
  f.v_gathered = std::move(fv.gathered);
  return f;
}

ValidationReport validate(const ApproxSolution& sol, Precision prec) {
  ValidationReport report;
  const RationalCoeffs& r = sol.rational;
  const RootFactoredForm& f = sol.factored;
  const int n = r.n;
  const int N = r.N;
  auto violation = [&](const std::string& s) { report.violations.push_back(s); };

  if (static_cast<int>(r.A.size()) != N + 2 || static_cast<int>(r.B.size()) != N) {
    violation("coefficient counts do not match N");
    return report;
  }
  if (!(r.B.back() > 0)) violation("leading denominator coefficient B_N must be positive (rejected solution)");

  const Precision fit_prec(std::max(sol.prec_bits, 64));
  const refmath::AnalyticConstants k = refmath::constants(n, fit_prec);
  {
    std::vector<Real> free(r.B.begin(), r.B.end());
    for (int j = 2; j <= N - 1; ++j) free.push_back(r.A[j]);
    const RationalCoeffs re = constrain(n, N, free, k);
    if (!re.A[0].identical(r.A[0])) violation("A_0 != Q_n(0)");
    if (!re.A[1].identical(r.A[1])) violation("A_1 != Q_n'(0) + Q_n(0) B_1");
    if (!re.A[N].identical(r.A[N])) violation("A_N != beta B_N + alpha B_{N-1}");
    if (!re.A[N + 1].identical(r.A[N + 1])) violation("A_{N+1} != alpha B_N");
  }

  if (!f.q0.identical(k.q0)) violation("factored q0 != Q_n(0)");
  if (!f.q1.identical(k.q1)) violation("factored q1 != Q_n'(0)");
  if (!f.q2.identical(Real(k.alpha - k.q1, f.q2.prec()))) violation("factored q2 != alpha - q1");
  if (f.u_degree() != N - 1) violation("degree of u is not N-1");
  if (f.v_degree() != N) violation("degree of v is not N");
  for (const auto& q : f.u_quads) {
    if (!(q.offset > 0)) violation("u quadratic factor with non-positive offset");
  }
  for (const auto& q : f.v_quads) {
    if (!(q.offset > 0)) violation("v quadratic factor with non-positive offset");
  }
  for (const Real& z : f.v_lins) {
    if (!(z < 0)) violation("v has a real root on [0, inf) (pole)");
  }
  if (!f.v_gathered.empty()) {
    for (const Real& c : f.v_gathered) {
      if (!(c > 0)) violation("gathered v factor has a non-positive coefficient");
    }
  }

  // Re-derive the exact error on a 4x denser grid.
  const GridSpec fine = sol.grid.refined(4);
  const std::vector<Real> xs = fine.points(n);
  const Model model(n, N, prec);
  const std::vector<Sample> samples = make_samples(n, xs, prec);
  const Curve curve = evaluate_curve(model, r, samples);
  if (!curve.valid) {
    violation("approximation has a pole or a non-positive value on the validation grid");
    return report;
  }
  const std::vector<Point> ext = find_extrema(model, r, samples, curve.e);
  report.recomputed_error_bits = to_bits(max_abs_error(ext, curve.max_abs));
  report.fine_grid_bits = to_bits(curve.max_abs);
  {
    Real coarse(prec.mpfr_bits());
    for (std::size_t i = 0; i < samples.size(); i += 4) coarse = max(coarse, abs(curve.e[i]));
    report.coarse_grid_bits = to_bits(coarse);
  }
  if (std::fabs(report.recomputed_error_bits - sol.exact_error_bits) > 0.1) {
    violation("stored exact_error_bits " + std::to_string(sol.exact_error_bits) + " does not reproduce (" +
              std::to_string(report.recomputed_error_bits) + ")");
  }
  if (std::fabs(report.coarse_grid_bits - report.fine_grid_bits) > 0.5) {
    report.warnings.push_back("under-resolved grid: coarse and 4x refined scans differ by more than 0.5 bit");
  }

  // Factored and coefficient forms must agree.
  const Real tol = ldexp(Real(1L, prec.mpfr_bits()), -prec.bits() / 2);
  for (std::size_t i = 0; i < samples.size(); i += 8) {
    const Real a = r.value(samples[i].x);
    const Real b = f.value(samples[i].x);
    if (abs(a - b) > tol * abs(a)) {
      violation("factored form differs from coefficient form at x=" + samples[i].x.decimal(12));
      break;
    }
  }
  return report;
}

}  // namespace boys::fit
