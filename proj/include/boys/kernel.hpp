#pragma once

// Finite-precision evaluation of F_0..F_n from a KernelTable.
//
// Only +, -, *, /, sqrt and one exp per point. Both the fitted form and the
// asymptote are computed for every point and one is selected, so the
// per-point work has no data-dependent branches. Build with
// -ffp-contract=off: generated sources and this header must round alike.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "boys/coeffs.hpp"
#include "boys/errors.hpp"

namespace boys::kernel {

using coeffs::KernelRow;
using coeffs::KernelTable;

// v^k by right-to-left binary powering.
template <class T>
inline T ipow(T v, int k) {
  T result = T(1);
  T b = v;
  while (k != 0) {
    if (k & 1) result = result * b;
    k >>= 1;
    if (k != 0) b = b * b;
  }
  return result;
}

namespace detail {

// prod (x - c)^2 + a, then prod (x - y), then the gathered monic polynomial.
template <class T>
inline T factor_product(const T* p, int quads, int lins, int gathered, T x) {
  T acc = T(1);
  for (int k = 0; k < quads; ++k, p += 2) {
    const T d = x - p[0];
    acc = acc * (d * d + p[1]);
  }
  for (int k = 0; k < lins; ++k, ++p) acc = acc * (x - p[0]);
  if (gathered > 0) {
    T g = T(1);
    for (int k = gathered; k-- > 0;) g = g * x + p[k];
    acc = acc * g;
  }
  return acc;
}

template <class T>
inline bool bad_argument(T x) {
  return !(x >= T(0)) || !(x <= std::numeric_limits<T>::max());
}

}  // namespace detail

// q0 + q1 x + q2 x^2 u(x) / v(x).
template <class T>
inline T eval_qtilde(const KernelRow<T>& row, T x) {
  const T u = detail::factor_product(row.u.data(), row.u_quads, row.u_lins, row.u_gathered, x);
  const T v = detail::factor_product(row.v.data(), row.v_quads, row.v_lins, row.v_gathered, x);
  return row.q0 + row.q1 * x + row.q2 * (x * x) * (u / v);
}

template <class T>
struct FnValue {
  T fn;
  T expx;  // e^{-x}, shared with the recursion
};

// No argument check; x must be finite and >= 0.
template <class T>
inline FnValue<T> eval_fn_unchecked(const KernelRow<T>& row, T x) {
  constexpr T tiny = std::numeric_limits<T>::min();
  const int n = row.n;
  const T t = std::exp(-x);
  const T xa = x < row.z ? x : row.z;
  const T q = eval_qtilde(row, xa);
  const T s = ipow(q, n) * std::sqrt(q);
  const T y = xa + s * t;
  const T r = row.scale / (y < tiny ? tiny : y);
  const T approx = row.c * ipow(r, n) * std::sqrt(r);
  const T ra = row.scale / (x < tiny ? tiny : x);
  const T asym = row.c * ipow(ra, n) * std::sqrt(ra);
  return FnValue<T>{x < row.z ? approx : asym, t};
}

// Throws DomainError for negative, NaN or infinite x.
template <class T>
FnValue<T> eval_fn(const KernelRow<T>& row, T x) {
  if (detail::bad_argument(x)) throw DomainError("Boys kernel argument must be finite and >= 0");
  return eval_fn_unchecked(row, x);
}

template <class T>
FnValue<T> eval_fn(int n, T x, const KernelTable<T>& table) {
  return eval_fn(table.row(n), x);
}

// out[n] = fn, out[m-1] = (2x out[m] + expx) / (2m - 1).
template <class T>
inline void recursion_fill(int n, T fn, T expx, T x, T* out) {
  const T x2 = x + x;
  out[n] = fn;
  for (int m = n; m >= 1; --m) out[m - 1] = (x2 * out[m] + expx) / static_cast<T>(2 * m - 1);
}

template <class T>
std::vector<T> recursion_fill(int n, T fn, T expx, T x) {
  std::vector<T> out(static_cast<std::size_t>(n) + 1);
  recursion_fill(n, fn, expx, x, out.data());
  return out;
}

enum class Layout { order_major, point_major };

template <class T>
struct EvalRequest {
  int n = 0;
  std::span<const T> xs;
  Layout layout = Layout::order_major;
};

template <class T>
struct EvalResult {
  int n = 0;
  std::size_t points = 0;
  Layout layout = Layout::order_major;
  std::vector<T> values;  // (n+1) x points, arranged by layout
  std::vector<T> expx;

  T at(int m, std::size_t i) const {
    return layout == Layout::order_major ? values[static_cast<std::size_t>(m) * points + i]
                                         : values[i * (static_cast<std::size_t>(n) + 1) + static_cast<std::size_t>(m)];
  }
};

// Throws BatchDomainError naming every bad index before any work is done,
// MissingOrder when the table lacks req.n.
template <class T>
EvalResult<T> eval_batch(const EvalRequest<T>& req, const KernelTable<T>& table);

// F_0..F_n seeded twice: F_n feeds m = n..n_bar+1, F_{n_bar} feeds
// m = n_bar..0. Requires 0 <= n_bar < n.
template <class T>
std::vector<T> eval_with_split(int n, int n_bar, T x, const KernelTable<T>& table);

extern template EvalResult<float> eval_batch<float>(const EvalRequest<float>&, const KernelTable<float>&);
extern template EvalResult<double> eval_batch<double>(const EvalRequest<double>&, const KernelTable<double>&);
extern template std::vector<float> eval_with_split<float>(int, int, float, const KernelTable<float>&);
extern template std::vector<double> eval_with_split<double>(int, int, double, const KernelTable<double>&);

}  // namespace boys::kernel
