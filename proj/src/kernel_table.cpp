#include <fmt/format.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "boys/coeffs.hpp"
#include "boys/errors.hpp"

namespace boys::coeffs {

namespace {

template <class T>
T round_to(const Real& r) {
  if constexpr (std::is_same_v<T, float>) {
    return r.to_float();
  } else {
    return r.to_double();
  }
}

template <class T>
bool profile_fits(const Profile& p) {
  switch (p.kind()) {
    case Profile::Kind::double53:
      return std::is_same_v<T, double>;
    case Profile::Kind::single24:
      return std::is_same_v<T, float>;
    case Profile::Kind::custom:
      break;
  }
  return true;
}

template <class T>
void push_factors(std::vector<T>& out, const std::vector<fit::QuadraticFactor>& quads, const std::vector<Real>& lins,
                  const std::vector<Real>& gathered) {
  for (const auto& q : quads) {
    out.push_back(round_to<T>(q.center));
    out.push_back(round_to<T>(q.offset));
  }
  for (const auto& y : lins) out.push_back(round_to<T>(y));
  for (const auto& g : gathered) out.push_back(round_to<T>(g));
}

template <class T>
constexpr const char* type_name() {
  return std::is_same_v<T, float> ? "float" : "double";
}

// Exact literal of a table value; negative values are parenthesised so they
// can follow a binary operator.
template <class T>
std::string lit(T v) {
  const std::string body = fmt::format("{:a}{}", static_cast<double>(v), std::is_same_v<T, float> ? "f" : "");
  return v < 0 ? "(" + body + ")" : body;
}

template <class T>
std::string small_int(int k) {
  return fmt::format("{}.0{}", k, std::is_same_v<T, float> ? "f" : "");
}

// Mirrors kernel::ipow: result starts at 1, base squares between bits.
void emit_ipow(std::ostringstream& os, const char* type, const std::string& name, const std::string& base, int k) {
  os << "  " << type << ' ' << name << " = 1;\n";
  if (k == 0) return;
  const std::string b = name + "_b";
  os << "  " << type << ' ' << b << " = " << base << ";\n";
  while (k != 0) {
    if (k & 1) os << "  " << name << " = " << name << " * " << b << ";\n";
    k >>= 1;
    if (k != 0) os << "  " << b << " = " << b << " * " << b << ";\n";
  }
}

// Mirrors kernel::detail::factor_product.
template <class T>
void emit_product(std::ostringstream& os, const std::string& name, const std::vector<T>& p, int quads, int lins,
                  int gathered) {
  const char* type = type_name<T>();
  os << "  " << type << ' ' << name << " = 1;\n";
  std::size_t i = 0;
  for (int k = 0; k < quads; ++k, i += 2) {
    const std::string d = fmt::format("{}_d{}", name, k);
    os << "  const " << type << ' ' << d << " = xa - " << lit(p[i]) << ";\n";
    os << "  " << name << " = " << name << " * (" << d << " * " << d << " + " << lit(p[i + 1]) << ");\n";
  }
  for (int k = 0; k < lins; ++k, ++i) os << "  " << name << " = " << name << " * (xa - " << lit(p[i]) << ");\n";
  if (gathered > 0) {
    const std::string g = name + "_g";
    os << "  " << type << ' ' << g << " = 1;\n";
    for (int k = gathered; k-- > 0;) os << "  " << g << " = " << g << " * xa + " << lit(p[i + k]) << ";\n";
    os << "  " << name << " = " << name << " * " << g << ";\n";
  }
}

}  // namespace

template <class T>
const KernelRow<T>& KernelTable<T>::row(int n) const {
  const auto it = rows_.find(n);
  if (it == rows_.end()) throw MissingOrder(n);
  return it->second;
}

template class KernelTable<float>;
template class KernelTable<double>;

template <class T>
KernelTable<T> build_kernel_table(const Dataset& ds) {
  constexpr int bits = std::numeric_limits<T>::digits;
  if (!profile_fits<T>(ds.profile)) {
    throw std::invalid_argument("dataset profile " + ds.profile.name() + " does not match a " + std::to_string(bits) +
                                "-bit table");
  }
  KernelTable<T> table;
  for (const auto& [n, s] : ds.solutions) {
    const Real* z = ds.cutoffs.find(n, bits);
    if (z == nullptr) {
      throw std::invalid_argument("dataset has no " + std::to_string(bits) + "-bit cutoff for order " +
                                  std::to_string(n));
    }
    const refmath::Precision prec(std::max(s.prec_bits, 64));
    const fit::RootFactoredForm& f = s.factored;
    KernelRow<T> row;
    row.n = n;
    row.N = s.N();
    const Real c = refmath::constants(n, prec).c;
    const long half_j = std::lround(log2(c).to_double() / (2 * n + 1));
    row.scale = std::ldexp(T(1), static_cast<int>(2 * half_j));
    row.c = round_to<T>(ldexp(c, -half_j * (2 * n + 1)));
    row.z = round_to<T>(*z);
    row.q0 = round_to<T>(f.q0);
    row.q1 = round_to<T>(f.q1);
    row.q2 = round_to<T>(f.q2);
    row.u_quads = static_cast<int>(f.u_quads.size());
    row.u_lins = static_cast<int>(f.u_lins.size());
    row.u_gathered = static_cast<int>(f.u_gathered.size());
    row.v_quads = static_cast<int>(f.v_quads.size());
    row.v_lins = static_cast<int>(f.v_lins.size());
    row.v_gathered = static_cast<int>(f.v_gathered.size());
    push_factors(row.u, f.u_quads, f.u_lins, f.u_gathered);
    push_factors(row.v, f.v_quads, f.v_lins, f.v_gathered);
    table.insert(std::move(row));
  }
  return table;
}

template KernelTable<float> build_kernel_table<float>(const Dataset&);
template KernelTable<double> build_kernel_table<double>(const Dataset&);

std::string generated_function_name(int n) { return "boys_fn_" + std::to_string(n); }

template <class T>
std::string gen_source(const KernelRow<T>& row) {
  const char* type = type_name<T>();
  const std::string tiny = lit(std::numeric_limits<T>::min());
  const int n = row.n;
  std::ostringstream os;
  os << "// F_m(x), m = 0.." << n << ", from the N = " << row.N << " approximation, "
     << std::numeric_limits<T>::digits << "-bit constants.\n";
  os << "inline void " << generated_function_name(n) << '(' << type << " x, " << type << "* f) {\n";
  os << "  const " << type << " t = std::exp(-x);\n";
  os << "  const " << type << " xa = x < " << lit(row.z) << " ? x : " << lit(row.z) << ";\n";
  emit_product(os, "u", row.u, row.u_quads, row.u_lins, row.u_gathered);
  emit_product(os, "v", row.v, row.v_quads, row.v_lins, row.v_gathered);
  os << "  const " << type << " q = " << lit(row.q0) << " + " << lit(row.q1) << " * xa + " << lit(row.q2)
     << " * (xa * xa) * (u / v);\n";
  emit_ipow(os, type, "qn", "q", n);
  os << "  const " << type << " s = qn * std::sqrt(q);\n";
  os << "  const " << type << " y = xa + s * t;\n";
  os << "  const " << type << " r = " << lit(row.scale) << " / (y < " << tiny << " ? " << tiny << " : y);\n";
  emit_ipow(os, type, "rn", "r", n);
  os << "  const " << type << " approx = " << lit(row.c) << " * rn * std::sqrt(r);\n";
  os << "  const " << type << " ra = " << lit(row.scale) << " / (x < " << tiny << " ? " << tiny << " : x);\n";
  emit_ipow(os, type, "an", "ra", n);
  os << "  const " << type << " asym = " << lit(row.c) << " * an * std::sqrt(ra);\n";
  os << "  f[" << n << "] = x < " << lit(row.z) << " ? approx : asym;\n";
  if (n > 0) os << "  const " << type << " x2 = x + x;\n";
  for (int m = n; m >= 1; --m) {
    os << "  f[" << m - 1 << "] = (x2 * f[" << m << "] + t) / " << small_int<T>(2 * m - 1) << ";\n";
  }
  os << "}\n";
  return os.str();
}

template std::string gen_source<float>(const KernelRow<float>&);
template std::string gen_source<double>(const KernelRow<double>&);

template <class T>
std::string gen_header(const KernelTable<T>& table, const std::string& namespace_name) {
  std::ostringstream os;
  os << "// Generated Boys function kernels, " << std::numeric_limits<T>::digits
     << "-bit table. Do not edit.\n"
     << "// Compile with -ffp-contract=off to reproduce the library kernel bit for bit.\n"
     << "#pragma once\n\n#include <cmath>\n\nnamespace " << namespace_name << " {\n";
  for (const auto& [n, row] : table.rows()) os << '\n' << gen_source(row);
  os << "\n}  // namespace " << namespace_name << '\n';
  return os.str();
}

template std::string gen_header<float>(const KernelTable<float>&, const std::string&);
template std::string gen_header<double>(const KernelTable<double>&, const std::string&);

}  // namespace boys::coeffs
