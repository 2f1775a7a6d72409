#pragma once

// The operations behind the boysfit command line tool.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boys/coeffs.hpp"

namespace boys::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kFitRejected = 3 };

// "0..8", "0-8", "3", "0,2,5..7"; the empty string is the empty range.
// Throws std::invalid_argument.
std::vector<int> parse_orders(const std::string& text);

// Denominator degree selection.
struct DegreePolicy {
  enum class Kind { automatic, table, fixed };
  Kind kind = Kind::table;
  std::map<int, int> fixed;  // n -> N; key -1 applies to every order
  // "auto", "table", "10" or "0:10,2:11". Throws std::invalid_argument.
  static DegreePolicy parse(const std::string& text);
  std::optional<int> degree_for(int n) const;
};

// The degrees used for the published accuracy table. The table policy falls
// back to N - 1, then N + 1, when a fit at this degree fails.
int table_degree(int n, int profile_bits);

// Target of the automatic policy: min(profile bits + 3, 64).
int auto_target_bits(int profile_bits);
inline constexpr int kAutoMaxDegree = 20;

struct FitRequest {
  std::vector<int> orders;
  DegreePolicy policy;
  coeffs::Profile profile = coeffs::Profile::double53();
  int prec_bits = 256;
  std::vector<int> cutoff_bits = {24, 53};
  bool gather = false;
  unsigned threads = 0;
};

struct FitAttempt {
  int n = 0;
  int N = 0;
  bool accepted = false;
  double exact_error_bits = 0;
  std::string message;  // rejection reason or validation warnings
};

struct FitOutcome {
  coeffs::Dataset dataset;
  std::vector<FitAttempt> attempts;  // in (n, N) order
  std::vector<int> failed_orders;    // orders with no accepted solution
};

FitOutcome run_fit(const FitRequest& req, std::ostream* log = nullptr);

// One row of the accuracy table; every eps is -log2 of a max relative error.
struct ScanRow {
  int n = 0;
  int N = 0;
  double eps_0 = 0;
  std::optional<double> eps_nm1;  // present for n >= 2
  double eps_n = 0;
  double eps_exact = 0;
  std::vector<double> eps;  // eps[m], m = 0..n

  bool operator==(const ScanRow&) const = default;
};

struct ErrorReport {
  coeffs::Profile profile = coeffs::Profile::double53();
  std::size_t points = 0;
  std::vector<ScanRow> rows;

  bool operator==(const ErrorReport&) const = default;
};

inline constexpr std::size_t kDefaultScanPoints = std::size_t{1} << 16;
inline constexpr std::size_t kDenseScanPoints = std::size_t{1} << 20;
inline constexpr int kScanOracleBits = 128;

// x_i = i z / points, i = 0..points-1, rounded to T; T chosen by
// target_bits (24 -> float, 53 -> double).
ScanRow scan_order(const coeffs::Dataset& ds, int n, std::size_t points, int target_bits, unsigned threads = 0);
ErrorReport scan_dataset(const coeffs::Dataset& ds, std::span<const int> orders, std::size_t points, int target_bits,
                         unsigned threads = 0);

// Same measurement with a caller-supplied evaluator in place of the kernel:
// eval(x, out) writes F_0..F_n at x. Used to compare evaluation forms.
std::vector<double> scan_errors(int n, std::span<const double> xs,
                                const std::function<void(double, double*)>& eval, unsigned threads = 0);

void write_report(std::ostream& out, const ErrorReport& report);
// Throws ParseError.
ErrorReport read_report(std::istream& in);

// The reports side by side in the column order of the published table,
// values to one decimal.
std::string render_table(std::span<const ErrorReport> reports);

}  // namespace boys::cli
