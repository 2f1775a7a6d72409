#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "boys/cli.hpp"
#include "boys/errors.hpp"
#include "boys/parallel.hpp"

namespace boys::cli {

namespace {

int to_int(std::string_view s, const std::string& what) {
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw std::invalid_argument("bad " + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

struct OrderResult {
  std::vector<FitAttempt> attempts;
  std::optional<fit::ApproxSolution> solution;
};

std::string join_messages(const std::vector<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : "; ") + x;
  return s;
}

// Fits (n, N) and validates; records the attempt either way.
std::optional<fit::ApproxSolution> attempt(int n, int N, const FitRequest& req, std::vector<FitAttempt>& log) {
  FitAttempt a;
  a.n = n;
  a.N = N;
  fit::FitOptions opt;
  opt.target_bits = req.profile.bits();
  opt.gather = req.gather;
  const refmath::Precision prec(req.prec_bits);
  try {
    fit::ApproxSolution s = fit::fit_minimax(n, N, prec, opt);
    a.exact_error_bits = s.exact_error_bits;
    const fit::ValidationReport v = fit::validate(s, prec);
    if (!v.ok()) {
      a.message = "validation failed: " + join_messages(v.violations);
      log.push_back(a);
      return std::nullopt;
    }
    a.accepted = true;
    a.message = join_messages(v.warnings);
    log.push_back(a);
    return s;
  } catch (const FitRejected& e) {
    a.message = std::string("rejected: ") + e.what();
  } catch (const NoSolution& e) {
    a.message = std::string("no solution: ") + e.what();
  } catch (const RootRefinementError& e) {
    a.message = std::string("root refinement failed: ") + e.what();
  }
  log.push_back(a);
  return std::nullopt;
}

OrderResult fit_order(int n, const FitRequest& req) {
  OrderResult r;
  if (req.policy.kind == DegreePolicy::Kind::automatic) {
    const int target = auto_target_bits(req.profile.bits());
    for (int N = 2; N <= kAutoMaxDegree; ++N) {
      auto s = attempt(n, N, req, r.attempts);
      if (s && s->exact_error_bits >= target) {
        r.solution = std::move(s);
        break;
      }
      if (s) r.attempts.back().accepted = false;  // valid but short of the target
    }
    return r;
  }
  if (req.policy.kind == DegreePolicy::Kind::table) {
    // The tabulated degree first, then its neighbours.
    const int N = table_degree(n, req.profile.bits());
    for (int cand : {N, N - 1, N + 1}) {
      if (cand < 2) continue;
      r.solution = attempt(n, cand, req, r.attempts);
      if (r.solution) break;
    }
    return r;
  }
  const std::optional<int> N = req.policy.degree_for(n);
  if (!N) {
    r.attempts.push_back(FitAttempt{n, 0, false, 0, "no degree given for this order"});
    return r;
  }
  r.solution = attempt(n, *N, req, r.attempts);
  return r;
}

}  // namespace

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (std::string_view part : split(text, ',')) {
    std::size_t dots = part.find("..");
    std::size_t width = 2;
    if (dots == std::string_view::npos) {
      dots = part.find('-');
      width = 1;
    }
    int lo = 0;
    int hi = 0;
    if (dots == std::string_view::npos) {
      lo = hi = to_int(part, "order");
    } else {
      lo = to_int(part.substr(0, dots), "order");
      hi = to_int(part.substr(dots + width), "order");
    }
    if (lo < 0 || hi > refmath::kMaxOrder || lo > hi) {
      throw std::invalid_argument("bad order range '" + std::string(part) + "'");
    }
    for (int n = lo; n <= hi; ++n) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

DegreePolicy DegreePolicy::parse(const std::string& text) {
  DegreePolicy p;
  if (text == "auto") {
    p.kind = Kind::automatic;
    return p;
  }
  if (text == "table") {
    p.kind = Kind::table;
    return p;
  }
  p.kind = Kind::fixed;
  for (std::string_view part : split(text, ',')) {
    const std::size_t colon = part.find(':');
    if (colon == std::string_view::npos) {
      p.fixed[-1] = to_int(part, "degree");
    } else {
      p.fixed[to_int(part.substr(0, colon), "order")] = to_int(part.substr(colon + 1), "degree");
    }
  }
  for (const auto& [n, N] : p.fixed) {
    if (N < 2 || N > 64) throw std::invalid_argument("degree N must be in [2, 64], got " + std::to_string(N));
  }
  return p;
}

std::optional<int> DegreePolicy::degree_for(int n) const {
  if (auto it = fixed.find(n); it != fixed.end()) return it->second;
  if (auto it = fixed.find(-1); it != fixed.end()) return it->second;
  return std::nullopt;
}

int table_degree(int n, int profile_bits) {
  if (profile_bits <= 24) {
    if (n <= 1) return 4;
    if (n <= 9) return 5;
    return 6;
  }
  if (n <= 1) return 10;
  if (n <= 6) return 11;
  if (n <= 10) return 12;
  if (n <= 17) return 13;
  return 14;
}

int auto_target_bits(int profile_bits) { return std::min(profile_bits + 3, 64); }

FitOutcome run_fit(const FitRequest& req, std::ostream* log) {
  std::vector<OrderResult> results(req.orders.size());
  std::mutex log_mutex;
  parallel_for(
      req.orders.size(),
      [&](std::size_t i) {
        results[i] = fit_order(req.orders[i], req);
        if (log != nullptr) {
          std::lock_guard<std::mutex> lock(log_mutex);
          for (const auto& a : results[i].attempts) {
            *log << fmt::format("n={:<2} N={:<2} {:<8} {:7.3f} bits  {}\n", a.n, a.N,
                                a.accepted ? "accepted" : "-", a.exact_error_bits, a.message);
          }
          log->flush();
        }
      },
      req.threads);

  FitOutcome out;
  out.dataset.profile = req.profile;
  std::vector<int> bits = req.cutoff_bits;
  bits.push_back(req.profile.bits());
  std::sort(bits.begin(), bits.end());
  bits.erase(std::unique(bits.begin(), bits.end()), bits.end());
  out.dataset.cutoffs = refmath::tabulate_cutoffs(req.orders, bits, refmath::Precision(req.prec_bits));
  for (std::size_t i = 0; i < req.orders.size(); ++i) {
    auto& r = results[i];
    out.attempts.insert(out.attempts.end(), r.attempts.begin(), r.attempts.end());
    if (r.solution) {
      out.dataset.solutions.emplace(req.orders[i], std::move(*r.solution));
    } else {
      out.failed_orders.push_back(req.orders[i]);
    }
  }
  return out;
}

}  // namespace boys::cli
