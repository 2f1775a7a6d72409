#include "boys/coeffs.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "boys/errors.hpp"

namespace boys::coeffs {

namespace {

using fit::ApproxSolution;
using fit::QuadraticFactor;

constexpr std::string_view kMagic = "format boys-dataset";

std::string hex_double(double v) { return fmt::format("{:a}", v); }

// Every real a solution owns, for precision checks.
std::vector<const Real*> solution_reals(const ApproxSolution& s) {
  std::vector<const Real*> out;
  for (const auto& r : s.rational.A) out.push_back(&r);
  for (const auto& r : s.rational.B) out.push_back(&r);
  const auto& f = s.factored;
  out.push_back(&f.q0);
  out.push_back(&f.q1);
  out.push_back(&f.q2);
  for (const auto* qs : {&f.u_quads, &f.v_quads}) {
    for (const auto& q : *qs) {
      out.push_back(&q.center);
      out.push_back(&q.offset);
    }
  }
  for (const auto* ls : {&f.u_lins, &f.v_lins, &f.u_gathered, &f.v_gathered}) {
    for (const auto& r : *ls) out.push_back(&r);
  }
  out.push_back(&s.grid.cutoff);
  return out;
}

void put_reals(std::ostream& out, std::string_view key, const std::vector<Real>& xs) {
  out << "  " << key;
  for (const auto& x : xs) out << ' ' << x.hex();
  out << '\n';
}

struct Line {
  std::size_t number;
  std::vector<std::string> tokens;
};

class Reader {
 public:
  explicit Reader(std::vector<Line> lines, std::size_t end_line) : lines_(std::move(lines)), end_line_(end_line) {}

  bool done() const { return pos_ >= lines_.size(); }
  const Line& peek() const {
    if (done()) throw ParseError(end_line_, "unexpected end of file");
    return lines_[pos_];
  }
  const Line& next() {
    const Line& l = peek();
    ++pos_;
    return l;
  }
  // Next line, which must start with `key` and have `count` values (or at
  // least `count` when `at_least`).
  const Line& expect(std::string_view key, std::size_t count, bool at_least = false) {
    const Line& l = next();
    if (l.tokens.front() != key) {
      throw ParseError(l.number, "expected '" + std::string(key) + "', found '" + l.tokens.front() + "'");
    }
    const std::size_t have = l.tokens.size() - 1;
    if (at_least ? have < count : have != count) {
      throw ParseError(l.number, "'" + std::string(key) + "' expects " + std::to_string(count) + " value(s), found " +
                                     std::to_string(have));
    }
    return l;
  }

 private:
  std::vector<Line> lines_;
  std::size_t end_line_;
  std::size_t pos_ = 0;
};

long parse_int(const Line& l, std::size_t i) {
  const std::string& t = l.tokens.at(i);
  long v = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw ParseError(l.number, "malformed integer '" + t + "'");
  return v;
}

Real parse_real(const Line& l, std::size_t i, long prec) {
  const std::string& t = l.tokens.at(i);
  const bool neg = !t.empty() && t[0] == '-';
  if (t.compare(neg ? 1 : 0, 2, "0x") != 0) throw ParseError(l.number, "malformed hexadecimal literal '" + t + "'");
  if (prec < MPFR_PREC_MIN || prec > 1L << 20) throw ParseError(l.number, "precision out of range");
  Real r(static_cast<Real::prec_t>(prec));
  char* end = nullptr;
  const int inexact = mpfr_strtofr(r.raw(), t.c_str(), &end, 16, MPFR_RNDN);
  if (end != t.c_str() + t.size() || !r.is_finite()) {
    throw ParseError(l.number, "malformed hexadecimal literal '" + t + "'");
  }
  if (inexact != 0) throw ParseError(l.number, "literal '" + t + "' is not representable in " + std::to_string(prec) + " bits");
  return r;
}

double parse_hex_double(const Line& l, std::size_t i) {
  const std::string& t = l.tokens.at(i);
  const bool neg = !t.empty() && t[0] == '-';
  const std::size_t skip = neg ? 3 : 2;
  if (t.compare(neg ? 1 : 0, 2, "0x") != 0) throw ParseError(l.number, "malformed hexadecimal literal '" + t + "'");
  double v = 0;
  const auto [p, ec] = std::from_chars(t.data() + skip, t.data() + t.size(), v, std::chars_format::hex);
  if (ec != std::errc() || p != t.data() + t.size()) throw ParseError(l.number, "malformed hexadecimal literal '" + t + "'");
  return neg ? -v : v;
}

std::vector<Real> parse_reals(const Line& l, long prec) {
  std::vector<Real> out;
  for (std::size_t i = 1; i < l.tokens.size(); ++i) out.push_back(parse_real(l, i, prec));
  return out;
}

ApproxSolution parse_solution(Reader& rd, const Line& head) {
  ApproxSolution s;
  const long n = parse_int(head, 1);
  if (n < 0 || n > refmath::kMaxOrder) throw ParseError(head.number, "order out of range");
  const Line& ln = rd.expect("N", 1);
  const long N = parse_int(ln, 1);
  if (N < 2 || N > 64) throw ParseError(ln.number, "degree N out of range");
  const Line& lp = rd.expect("prec", 1);
  const long prec = parse_int(lp, 1);
  s.prec_bits = static_cast<int>(prec);
  s.exact_error_bits = parse_hex_double(rd.expect("exact_error_bits", 1), 1);
  const Line& lg = rd.expect("grid", 4);
  s.grid.target_bits = static_cast<int>(parse_int(lg, 1));
  s.grid.uniform_points = static_cast<int>(parse_int(lg, 2));
  s.grid.tail_points = static_cast<int>(parse_int(lg, 3));
  s.grid.cutoff = parse_real(lg, 4, prec);

  s.rational.n = s.factored.n = static_cast<int>(n);
  s.rational.N = s.factored.N = static_cast<int>(N);
  s.rational.A = parse_reals(rd.expect("A", static_cast<std::size_t>(N) + 2), prec);
  s.rational.B = parse_reals(rd.expect("B", static_cast<std::size_t>(N)), prec);
  auto& f = s.factored;
  f.q0 = parse_real(rd.expect("q0", 1), 1, prec);
  f.q1 = parse_real(rd.expect("q1", 1), 1, prec);
  f.q2 = parse_real(rd.expect("q2", 1), 1, prec);

  for (;;) {
    const Line& l = rd.next();
    const std::string& key = l.tokens.front();
    if (key == "end") {
      if (l.tokens.size() != 1) throw ParseError(l.number, "'end' takes no values");
      break;
    }
    if (key == "u_quad" || key == "v_quad") {
      if (l.tokens.size() != 3) throw ParseError(l.number, "'" + key + "' expects 2 values");
      (key[0] == 'u' ? f.u_quads : f.v_quads).push_back(QuadraticFactor{parse_real(l, 1, prec), parse_real(l, 2, prec)});
    } else if (key == "u_lin" || key == "v_lin") {
      if (l.tokens.size() != 2) throw ParseError(l.number, "'" + key + "' expects 1 value");
      (key[0] == 'u' ? f.u_lins : f.v_lins).push_back(parse_real(l, 1, prec));
    } else if (key == "u_gathered" || key == "v_gathered") {
      auto& dst = key[0] == 'u' ? f.u_gathered : f.v_gathered;
      if (!dst.empty() || l.tokens.size() < 2) throw ParseError(l.number, "bad '" + key + "' line");
      dst = parse_reals(l, prec);
    } else {
      throw ParseError(l.number, "unknown key '" + key + "' in solution block");
    }
  }
  if (f.u_degree() != N - 1 || f.v_degree() != N) {
    throw ParseError(head.number, "factor degrees do not match N=" + std::to_string(N));
  }
  return s;
}

}  // namespace

Profile Profile::custom(int bits) {
  if (bits < 2 || bits > 4096) throw std::invalid_argument("custom profile bits out of range");
  return Profile(Kind::custom, bits);
}

Profile Profile::parse(const std::string& text) {
  if (text == "double53" || text == "double") return double53();
  if (text == "single24" || text == "single") return single24();
  std::istringstream is(text);
  std::string word;
  int bits = 0;
  if (is >> word >> bits && word == "custom" && is.eof()) return custom(bits);
  throw std::invalid_argument("unknown profile '" + text + "'");
}

std::string Profile::name() const {
  switch (kind_) {
    case Kind::double53:
      return "double53";
    case Kind::single24:
      return "single24";
    case Kind::custom:
      break;
  }
  return "custom " + std::to_string(bits_);
}

const fit::ApproxSolution& Dataset::at(int n) const {
  const auto it = solutions.find(n);
  if (it == solutions.end()) throw MissingOrder(n);
  return it->second;
}

bool Dataset::identical(const Dataset& o) const {
  if (version != o.version || !(profile == o.profile) || !(cutoffs == o.cutoffs)) return false;
  if (solutions.size() != o.solutions.size()) return false;
  for (auto a = solutions.begin(), b = o.solutions.begin(); a != solutions.end(); ++a, ++b) {
    if (a->first != b->first || !a->second.identical(b->second)) return false;
  }
  return true;
}

std::vector<std::string> check(const Dataset& ds) {
  std::vector<std::string> problems;
  for (const auto& [n, s] : ds.solutions) {
    const std::string tag = "order " + std::to_string(n) + ": ";
    if (s.n() != n || s.factored.n != n) problems.push_back(tag + "key does not match the solution order");
    if (s.prec_bits < 64) problems.push_back(tag + "precision below 64 bits");
    for (const Real* r : solution_reals(s)) {
      if (r->prec() != s.prec_bits) {
        problems.push_back(tag + "a real is not stored at the solution precision");
        break;
      }
      if (!r->is_finite()) {
        problems.push_back(tag + "non-finite real");
        break;
      }
    }
    if (ds.cutoffs.find(n, ds.profile.bits()) == nullptr) {
      problems.push_back(tag + "no cutoff for " + std::to_string(ds.profile.bits()) + " bits");
    }
  }
  return problems;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save(const Dataset& ds, std::ostream& out) {
  const auto problems = check(ds);
  if (!problems.empty()) throw std::invalid_argument("cannot save dataset: " + problems.front());
  std::ostringstream body;
  body << "# Boys function approximations F_n(x) = c_n / (x + Q^p e^-x)^p, p = n + 1/2\n";
  body << kMagic << ' ' << ds.version << '\n';
  body << "profile " << ds.profile.name() << '\n';
  for (const auto& e : ds.cutoffs.entries()) {
    body << "cutoff " << e.n << ' ' << e.b << ' ' << e.z.prec() << ' ' << e.z.hex() << '\n';
  }
  for (const auto& [n, s] : ds.solutions) {
    body << "solution " << n << '\n';
    body << "  N " << s.N() << '\n';
    body << "  prec " << s.prec_bits << '\n';
    body << "  exact_error_bits " << hex_double(s.exact_error_bits) << '\n';
    body << "  grid " << s.grid.target_bits << ' ' << s.grid.uniform_points << ' ' << s.grid.tail_points << ' '
         << s.grid.cutoff.hex() << '\n';
    put_reals(body, "A", s.rational.A);
    put_reals(body, "B", s.rational.B);
    const auto& f = s.factored;
    body << "  q0 " << f.q0.hex() << "\n  q1 " << f.q1.hex() << "\n  q2 " << f.q2.hex() << '\n';
    for (const auto& q : f.u_quads) body << "  u_quad " << q.center.hex() << ' ' << q.offset.hex() << '\n';
    for (const auto& y : f.u_lins) body << "  u_lin " << y.hex() << '\n';
    if (!f.u_gathered.empty()) put_reals(body, "u_gathered", f.u_gathered);
    for (const auto& q : f.v_quads) body << "  v_quad " << q.center.hex() << ' ' << q.offset.hex() << '\n';
    for (const auto& y : f.v_lins) body << "  v_lin " << y.hex() << '\n';
    if (!f.v_gathered.empty()) put_reals(body, "v_gathered", f.v_gathered);
    body << "end\n";
  }
  const std::string text = body.str();
  out << text << fmt::format("checksum fnv1a64 {:016x}\n", fnv1a64(text));
}

void save(const Dataset& ds, const std::filesystem::path& path) {
  std::ostringstream buf;
  save(ds, buf);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << buf.str();
  if (!f.flush()) throw std::runtime_error("write to '" + path.string() + "' failed");
}

Dataset load(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  // Split into lines, remembering where the checksum line begins.
  std::vector<Line> lines;
  std::size_t checksum_at = std::string::npos;
  std::size_t checksum_line = 0;
  std::string checksum_value;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) throw ParseError(number + 1, "missing final newline (truncated file?)");
    ++number;
    const std::string_view raw(text.data() + pos, eol - pos);
    Line l{number, {}};
    std::istringstream is{std::string(raw)};
    for (std::string tok; is >> tok;) l.tokens.push_back(std::move(tok));
    if (checksum_at != std::string::npos && !l.tokens.empty()) {
      throw ParseError(number, "content after the checksum line");
    }
    if (!l.tokens.empty() && l.tokens.front() == "checksum") {
      if (l.tokens.size() != 3 || l.tokens[1] != "fnv1a64") throw ParseError(number, "malformed checksum line");
      checksum_at = pos;
      checksum_line = number;
      checksum_value = l.tokens[2];
    } else if (!l.tokens.empty() && l.tokens.front()[0] != '#') {
      lines.push_back(std::move(l));
    }
    pos = eol + 1;
  }
  if (checksum_at == std::string::npos) throw ParseError(number + 1, "missing checksum line (truncated file?)");
  const std::string expected = fmt::format("{:016x}", fnv1a64(std::string_view(text.data(), checksum_at)));
  if (checksum_value != expected) {
    throw ParseError(checksum_line, "checksum mismatch: file says " + checksum_value + ", content hashes to " + expected);
  }

  Reader rd(std::move(lines), checksum_line);
  Dataset ds;
  {
    const Line& l = rd.next();
    if (l.tokens.size() != 3 || l.tokens[0] + " " + l.tokens[1] != kMagic) {
      throw ParseError(l.number, "not a boys dataset (expected '" + std::string(kMagic) + " <version>')");
    }
    ds.version = static_cast<int>(parse_int(l, 2));
    if (ds.version != kFormatVersion) {
      throw ParseError(l.number, "unsupported format version " + std::to_string(ds.version) + " (expected " +
                                     std::to_string(kFormatVersion) + ")");
    }
  }
  {
    const Line& l = rd.expect("profile", 1, true);
    std::string name = l.tokens[1];
    for (std::size_t i = 2; i < l.tokens.size(); ++i) name += " " + l.tokens[i];
    try {
      ds.profile = Profile::parse(name);
    } catch (const std::invalid_argument& e) {
      throw ParseError(l.number, e.what());
    }
  }
  while (!rd.done()) {
    const Line& l = rd.next();
    const std::string& key = l.tokens.front();
    if (key == "cutoff") {
      if (l.tokens.size() != 5) throw ParseError(l.number, "'cutoff' expects n b prec z");
      const long n = parse_int(l, 1);
      const long b = parse_int(l, 2);
      if (n < 0 || n > refmath::kMaxOrder || b < 1) throw ParseError(l.number, "cutoff order or bits out of range");
      ds.cutoffs.insert(refmath::CutoffEntry{static_cast<int>(n), static_cast<int>(b), parse_real(l, 4, parse_int(l, 3))});
    } else if (key == "solution") {
      if (l.tokens.size() != 2) throw ParseError(l.number, "'solution' expects the order");
      ApproxSolution s = parse_solution(rd, l);
      const int n = s.n();
      if (!ds.solutions.emplace(n, std::move(s)).second) {
        throw ParseError(l.number, "duplicate solution for order " + std::to_string(n));
      }
    } else {
      throw ParseError(l.number, "unknown record '" + key + "'");
    }
  }
  return ds;
}

Dataset load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  return load(f);
}

}  // namespace boys::coeffs
