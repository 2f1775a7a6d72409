#pragma once

// Dataset of fitted solutions and cutoffs, its text serialization, and the
// flat per-order tables the kernel evaluates from.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "boys/fit.hpp"
#include "boys/refmath.hpp"

namespace boys::coeffs {

inline constexpr int kFormatVersion = 1;

class Profile {
 public:
  enum class Kind { double53, single24, custom };

  static Profile double53() { return Profile(Kind::double53, 53); }
  static Profile single24() { return Profile(Kind::single24, 24); }
  static Profile custom(int bits);
  // "double53", "single24" or "custom <bits>".
  static Profile parse(const std::string& text);

  Kind kind() const { return kind_; }
  int bits() const { return bits_; }
  std::string name() const;

  friend bool operator==(const Profile&, const Profile&) = default;

 private:
  Profile(Kind k, int bits) : kind_(k), bits_(bits) {}
  Kind kind_;
  int bits_;
};

struct Dataset {
  int version = kFormatVersion;
  Profile profile = Profile::double53();
  std::map<int, fit::ApproxSolution> solutions;
  refmath::CutoffTable cutoffs;

  // Throws MissingOrder.
  const fit::ApproxSolution& at(int n) const;
  bool identical(const Dataset& o) const;
};

// Structural checks that need no oracle work: keys match orders, every real
// of a solution carries the solution precision, cutoffs exist for each order
// at the profile bits. Returns the list of problems.
std::vector<std::string> check(const Dataset& ds);

void save(const Dataset& ds, std::ostream& out);
void save(const Dataset& ds, const std::filesystem::path& path);
// Throws ParseError (with line number) on any malformed, truncated or
// checksum-mismatched input. Never returns a partial dataset.
Dataset load(std::istream& in);
Dataset load(const std::filesystem::path& path);

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

// One order, rounded once from the solution precision to T.
//
// u holds L pairs (center, offset), then the real roots, then the gathered
// coefficients (ascending, leading 1 implied). v has the same layout.
//
// scale is 2^j with j even, chosen so that c_n scale^-(n+1/2) is near 1; c
// holds that product. The kernel forms r = scale / y, which keeps c and
// r^n inside the range of T at large n without changing any rounding.
template <class T>
struct KernelRow {
  int n = 0;
  int N = 0;
  T c{}, scale{}, z{}, q0{}, q1{}, q2{};
  int u_quads = 0, u_lins = 0, u_gathered = 0;
  int v_quads = 0, v_lins = 0, v_gathered = 0;
  std::vector<T> u;
  std::vector<T> v;

  bool operator==(const KernelRow&) const = default;
};

template <class T>
class KernelTable {
 public:
  static constexpr int kBits = std::numeric_limits<T>::digits;

  // Throws MissingOrder.
  const KernelRow<T>& row(int n) const;
  bool contains(int n) const { return rows_.count(n) != 0; }
  std::size_t size() const { return rows_.size(); }
  const std::map<int, KernelRow<T>>& rows() const { return rows_; }
  void insert(KernelRow<T> row) { rows_[row.n] = std::move(row); }

  bool operator==(const KernelTable&) const = default;

 private:
  std::map<int, KernelRow<T>> rows_;
};

// Throws std::invalid_argument when the profile does not match T
// (double53 -> double, single24 -> float; custom profiles fit either), and
// MissingOrder when a cutoff for the target bits is absent.
template <class T>
KernelTable<T> build_kernel_table(const Dataset& ds);

extern template KernelTable<float> build_kernel_table<float>(const Dataset&);
extern template KernelTable<double> build_kernel_table<double>(const Dataset&);

// Loop-free C++ for one order; see docs/generated-code.md.
template <class T>
std::string gen_source(const KernelRow<T>& row);

extern template std::string gen_source<float>(const KernelRow<float>&);
extern template std::string gen_source<double>(const KernelRow<double>&);

// Name of the function gen_source emits for order n.
std::string generated_function_name(int n);

// A complete header: <cmath>, then gen_source for every row inside
// `namespace_name`.
template <class T>
std::string gen_header(const KernelTable<T>& table, const std::string& namespace_name);

extern template std::string gen_header<float>(const KernelTable<float>&, const std::string&);
extern template std::string gen_header<double>(const KernelTable<double>&, const std::string&);

}  // namespace boys::coeffs
