#include "boys/kernel.hpp"

#include <stdexcept>
#include <string>

namespace boys::kernel {

template <class T>
EvalResult<T> eval_batch(const EvalRequest<T>& req, const KernelTable<T>& table) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < req.xs.size(); ++i) {
    if (detail::bad_argument(req.xs[i])) bad.push_back(i);
  }
  if (!bad.empty()) throw BatchDomainError(std::move(bad));
  const KernelRow<T>& row = table.row(req.n);

  const std::size_t points = req.xs.size();
  const std::size_t orders = static_cast<std::size_t>(req.n) + 1;
  EvalResult<T> res;
  res.n = req.n;
  res.points = points;
  res.layout = req.layout;
  res.values.resize(orders * points);
  res.expx.resize(points);

  if (req.layout == Layout::point_major) {
    for (std::size_t i = 0; i < points; ++i) {
      const T x = req.xs[i];
      const FnValue<T> f = eval_fn_unchecked(row, x);
      res.expx[i] = f.expx;
      recursion_fill(req.n, f.fn, f.expx, x, res.values.data() + i * orders);
    }
    return res;
  }

  // Order-major: seed row n for every point, then run the recursion one
  // order at a time across the batch.
  T* top = res.values.data() + static_cast<std::size_t>(req.n) * points;
  for (std::size_t i = 0; i < points; ++i) {
    const FnValue<T> f = eval_fn_unchecked(row, req.xs[i]);
    top[i] = f.fn;
    res.expx[i] = f.expx;
  }
  for (int m = req.n; m >= 1; --m) {
    const T* hi = res.values.data() + static_cast<std::size_t>(m) * points;
    T* lo = res.values.data() + static_cast<std::size_t>(m - 1) * points;
    const T den = static_cast<T>(2 * m - 1);
    for (std::size_t i = 0; i < points; ++i) {
      const T x2 = req.xs[i] + req.xs[i];
      lo[i] = (x2 * hi[i] + res.expx[i]) / den;
    }
  }
  return res;
}

template <class T>
std::vector<T> eval_with_split(int n, int n_bar, T x, const KernelTable<T>& table) {
  if (n_bar < 0 || n_bar >= n) {
    throw std::invalid_argument("eval_with_split needs 0 <= n_bar < n, got n=" + std::to_string(n) +
                                " n_bar=" + std::to_string(n_bar));
  }
  if (detail::bad_argument(x)) throw DomainError("Boys kernel argument must be finite and >= 0");
  const FnValue<T> hi = eval_fn_unchecked(table.row(n), x);
  const FnValue<T> lo = eval_fn_unchecked(table.row(n_bar), x);
  std::vector<T> out(static_cast<std::size_t>(n) + 1);
  const T x2 = x + x;
  out[n] = hi.fn;
  for (int m = n; m >= n_bar + 2; --m) out[m - 1] = (x2 * out[m] + hi.expx) / static_cast<T>(2 * m - 1);
  recursion_fill(n_bar, lo.fn, lo.expx, x, out.data());
  return out;
}

template EvalResult<float> eval_batch<float>(const EvalRequest<float>&, const KernelTable<float>&);
template EvalResult<double> eval_batch<double>(const EvalRequest<double>&, const KernelTable<double>&);
template std::vector<float> eval_with_split<float>(int, int, float, const KernelTable<float>&);
template std::vector<double> eval_with_split<double>(int, int, double, const KernelTable<double>&);

}  // namespace boys::kernel
