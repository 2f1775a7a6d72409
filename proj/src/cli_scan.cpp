#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "boys/cli.hpp"
#include "boys/errors.hpp"
#include "boys/kernel.hpp"
#include "boys/parallel.hpp"

namespace boys::cli {

namespace {

constexpr std::size_t kChunk = 1024;

double to_bits(double max_error) {
  return max_error == 0 ? std::numeric_limits<double>::infinity() : -std::log2(max_error);
}

// Max relative error per order over xs. eval_chunk(begin, count, out) writes
// F_m at xs[begin + i] into out[i * (n + 1) + m].
template <class T, class EvalChunk>
std::vector<double> measure(int n, std::span<const T> xs, EvalChunk&& eval_chunk, unsigned threads) {
  const std::size_t orders = static_cast<std::size_t>(n) + 1;
  const std::size_t chunks = (xs.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(orders, 0.0));
  parallel_for(
      chunks,
      [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t count = std::min(kChunk, xs.size() - begin);
        std::vector<T> vals(count * orders);
        eval_chunk(begin, count, vals.data());
        const refmath::Precision prec(kScanOracleBits);
        Real approx(kScanOracleBits);
        for (std::size_t i = 0; i < count; ++i) {
          const Real x(static_cast<double>(xs[begin + i]), 64);
          const std::vector<Real> ref = refmath::boys_ref_all(n, x, prec);
          for (std::size_t m = 0; m < orders; ++m) {
            mpfr_set_d(approx.raw(), static_cast<double>(vals[i * orders + m]), MPFR_RNDN);
            const double e = (abs(approx - ref[m]) / ref[m]).to_double();
            partial[c][m] = std::max(partial[c][m], e);
          }
        }
      },
      threads);
  std::vector<double> worst(orders, 0.0);
  for (const auto& p : partial) {
    for (std::size_t m = 0; m < orders; ++m) worst[m] = std::max(worst[m], p[m]);
  }
  std::vector<double> bits(orders);
  for (std::size_t m = 0; m < orders; ++m) bits[m] = to_bits(worst[m]);
  return bits;
}

template <class T>
ScanRow scan_typed(const coeffs::Dataset& ds, int n, std::size_t points, unsigned threads) {
  const fit::ApproxSolution& sol = ds.at(n);
  const coeffs::KernelTable<T> table = coeffs::build_kernel_table<T>(ds);
  const coeffs::KernelRow<T>& row = table.row(n);
  std::vector<T> xs(points);
  const double z = static_cast<double>(row.z);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = static_cast<T>(static_cast<double>(i) * z / static_cast<double>(points));
  }
  const std::span<const T> grid(xs);
  auto eval_chunk = [&](std::size_t begin, std::size_t count, T* out) {
    kernel::EvalRequest<T> req;
    req.n = n;
    req.xs = grid.subspan(begin, count);
    req.layout = kernel::Layout::point_major;
    const kernel::EvalResult<T> res = kernel::eval_batch(req, table);
    std::copy(res.values.begin(), res.values.end(), out);
  };
  ScanRow r;
  r.n = n;
  r.N = sol.N();
  r.eps = measure<T>(n, grid, eval_chunk, threads);
  r.eps_0 = r.eps.front();
  r.eps_n = r.eps.back();
  if (n >= 2) r.eps_nm1 = r.eps[static_cast<std::size_t>(n) - 1];
  r.eps_exact = sol.exact_error_bits;
  return r;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "malformed number '" + s + "'");
  return v;
}

long parse_long(const std::string& s, std::size_t line) {
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "malformed integer '" + s + "'");
  return v;
}

std::string cell(std::optional<double> v, int width) {
  if (!v) return std::string(static_cast<std::size_t>(width), ' ');
  if (std::isinf(*v)) return fmt::format("{:>{}}", "inf", width);
  return fmt::format("{:>{}.1f}", *v, width);
}

}  // namespace

ScanRow scan_order(const coeffs::Dataset& ds, int n, std::size_t points, int target_bits, unsigned threads) {
  if (points == 0) throw std::invalid_argument("scan needs at least one point");
  if (target_bits == 24) return scan_typed<float>(ds, n, points, threads);
  if (target_bits == 53) return scan_typed<double>(ds, n, points, threads);
  throw std::invalid_argument("scan target must be 24 or 53 bits, got " + std::to_string(target_bits));
}

ErrorReport scan_dataset(const coeffs::Dataset& ds, std::span<const int> orders, std::size_t points, int target_bits,
                         unsigned threads) {
  ErrorReport rep;
  rep.profile = target_bits == 24 ? coeffs::Profile::single24() : coeffs::Profile::double53();
  rep.points = points;
  for (int n : orders) rep.rows.push_back(scan_order(ds, n, points, target_bits, threads));
  return rep;
}

std::vector<double> scan_errors(int n, std::span<const double> xs, const std::function<void(double, double*)>& eval,
                                unsigned threads) {
  const std::size_t orders = static_cast<std::size_t>(n) + 1;
  auto eval_chunk = [&](std::size_t begin, std::size_t count, double* out) {
    for (std::size_t i = 0; i < count; ++i) eval(xs[begin + i], out + i * orders);
  };
  return measure<double>(n, xs, eval_chunk, threads);
}

void write_report(std::ostream& out, const ErrorReport& report) {
  out << "# boysfit scan report; eps = -log2(max relative error)\n";
  out << "profile " << report.profile.name() << '\n';
  out << "points " << report.points << '\n';
  out << "# row n N eps_0 eps_n-1 eps_n eps_exact / eps_0 .. eps_n\n";
  for (const auto& r : report.rows) {
    out << fmt::format("row {} {} {} {} {} {} /", r.n, r.N, r.eps_0, r.eps_nm1 ? fmt::format("{}", *r.eps_nm1) : "-",
                       r.eps_n, r.eps_exact);
    for (double e : r.eps) out << ' ' << fmt::format("{}", e);
    out << '\n';
  }
}

ErrorReport read_report(std::istream& in) {
  ErrorReport rep;
  bool have_profile = false;
  bool have_points = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::istringstream is(text);
    std::vector<std::string> tok;
    for (std::string t; is >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok[0] == "profile") {
      std::string name;
      for (std::size_t i = 1; i < tok.size(); ++i) name += (i > 1 ? " " : "") + tok[i];
      try {
        rep.profile = coeffs::Profile::parse(name);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
      }
      have_profile = true;
    } else if (tok[0] == "points") {
      if (tok.size() != 2) throw ParseError(line, "'points' expects one value");
      rep.points = static_cast<std::size_t>(parse_long(tok[1], line));
      have_points = true;
    } else if (tok[0] == "row") {
      if (tok.size() < 8 || tok[7] != "/") throw ParseError(line, "malformed row");
      ScanRow r;
      r.n = static_cast<int>(parse_long(tok[1], line));
      r.N = static_cast<int>(parse_long(tok[2], line));
      r.eps_0 = parse_double(tok[3], line);
      if (tok[4] != "-") r.eps_nm1 = parse_double(tok[4], line);
      r.eps_n = parse_double(tok[5], line);
      r.eps_exact = parse_double(tok[6], line);
      for (std::size_t i = 8; i < tok.size(); ++i) r.eps.push_back(parse_double(tok[i], line));
      if (r.eps.size() != static_cast<std::size_t>(r.n) + 1) throw ParseError(line, "row needs n+1 per-order values");
      rep.rows.push_back(std::move(r));
    } else {
      throw ParseError(line, "unknown record '" + tok[0] + "'");
    }
  }
  if (!have_profile || !have_points) throw ParseError(line + 1, "report lacks 'profile' or 'points'");
  return rep;
}

std::string render_table(std::span<const ErrorReport> reports) {
  constexpr int w = 6;
  std::ostringstream os;
  // Header: one group of columns per report.
  os << fmt::format("{:>3} ", "");
  for (const auto& r : reports) {
    const std::string title = fmt::format("{}-bit {}", r.profile.bits(), r.profile.bits() <= 24 ? "single" : "double");
    os << fmt::format("| {:^{}} ", title, 4 + 4 * (w + 1));
  }
  os << '\n' << fmt::format("{:>3} ", "n");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    os << fmt::format("| {:>3} {:>{}} {:>{}} {:>{}} {:>{}} ", "N", "eb_0", w, "eb_n-1", w, "eb_n", w, "e_n", w);
  }
  os << '\n';

  std::vector<int> orders;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) orders.push_back(row.n);
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  std::vector<int> last_degree(reports.size(), -1);
  for (int n : orders) {
    os << fmt::format("{:>3} ", n);
    for (std::size_t k = 0; k < reports.size(); ++k) {
      const ScanRow* row = nullptr;
      for (const auto& r : reports[k].rows) {
        if (r.n == n) row = &r;
      }
      if (row == nullptr) {
        os << fmt::format("| {:>3} {} {} {} {} ", "", cell({}, w), cell({}, w), cell({}, w), cell({}, w));
        continue;
      }
      // Like the published table, N is shown only where it changes.
      const std::string degree = row->N != last_degree[k] ? std::to_string(row->N) : "";
      last_degree[k] = row->N;
      os << fmt::format("| {:>3} {} {} {} {} ", degree, cell(row->eps_0, w), cell(row->eps_nm1, w),
                        cell(row->eps_n, w), cell(row->eps_exact, w));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace boys::cli
