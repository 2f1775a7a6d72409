// boysfit: fit, scan and tabulate Boys function approximations.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "boys/cli.hpp"
#include "boys/coeffs.hpp"
#include "boys/errors.hpp"
#include "boys/refmath.hpp"

namespace {

using namespace boys;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to --out, or stdout when it is empty or "-".
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) throw std::runtime_error("cannot write '" + out + "'");
}

coeffs::Profile profile_flag(const std::string& s) {
  if (s == "double") return coeffs::Profile::double53();
  if (s == "single") return coeffs::Profile::single24();
  throw UsageError("--profile must be 'double' or 'single', got '" + s + "'");
}

std::vector<int> orders_flag(const std::string& s) {
  try {
    return cli::parse_orders(s);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--n: ") + e.what());
  }
}

std::vector<int> dataset_orders(const coeffs::Dataset& ds, const std::string& flag, bool given) {
  if (given) return orders_flag(flag);
  std::vector<int> out;
  for (const auto& [n, s] : ds.solutions) out.push_back(n);
  return out;
}

int target_bits_for(const coeffs::Dataset& ds, const std::string& profile, bool given) {
  if (given) return profile_flag(profile).bits();
  const int b = ds.profile.bits();
  if (b != 24 && b != 53) throw UsageError("dataset has a custom profile; pass --profile");
  return b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fit, scan and tabulate Boys function approximations"};
  app.require_subcommand(1);
  int code = cli::kOk;

  std::string orders = "0..8";
  std::string degree = "table";
  std::string profile = "double";
  std::string out;
  std::string in;
  int bits = 256;
  std::size_t points = cli::kDefaultScanPoints;
  bool dense = false;
  bool gather = false;
  unsigned threads = 0;
  std::vector<std::string> inputs;
  double x_max = 32;
  std::string bits_list = "24,53";
  std::string ns;

  auto* fit = app.add_subcommand("fit", "fit approximations and write a dataset");
  fit->add_option("--n", orders, "orders, e.g. 0..8 or 0,2,5")->capture_default_str();
  fit->add_option("--N", degree, "degree policy: auto, table, a number, or n:N list")->capture_default_str();
  fit->add_option("--profile", profile, "double or single")->capture_default_str();
  fit->add_option("--bits", bits, "working precision in bits (>= 192)")->capture_default_str();
  fit->add_flag("--gather", gather, "gather negative-real-part factors into one polynomial");
  fit->add_option("--threads", threads, "worker threads (0: all cores)");
  fit->add_option("--out", out, "dataset file")->required();

  auto* scan = app.add_subcommand("scan", "measure finite-precision errors against the oracle");
  auto* scan_n = scan->add_option("--n", orders, "orders to scan (default: all in the dataset)");
  auto* scan_profile = scan->add_option("--profile", profile, "double or single (default: dataset profile)");
  scan->add_option("--points", points, "grid points on [0, z)")->capture_default_str();
  scan->add_flag("--dense", dense, "use 2^20 points");
  scan->add_option("--threads", threads, "worker threads (0: all cores)");
  scan->add_option("--in", in, "dataset file")->required();
  scan->add_option("--out", out, "report file (default: stdout)");

  auto* table = app.add_subcommand("table", "render scan reports as the accuracy table");
  table->add_option("reports", inputs, "scan report files")->required();
  table->add_option("--out", out, "output file (default: stdout)");

  auto* qplot = app.add_subcommand("qplot", "tabulate Q_n(x) for plotting");
  qplot->add_option("--n", orders, "largest order")->capture_default_str();
  qplot->add_option("--x-max", x_max, "largest x")->capture_default_str();
  qplot->add_option("--points", points, "number of samples");
  qplot->add_option("--bits", bits, "working precision")->capture_default_str();
  qplot->add_option("--out", out, "output file (default: stdout)");

  auto* cutoffs = app.add_subcommand("cutoffs", "tabulate asymptotic cutoffs z_nb");
  cutoffs->add_option("--n", orders, "orders")->capture_default_str();
  cutoffs->add_option("--bits", bits_list, "comma separated b values")->capture_default_str();
  cutoffs->add_option("--profile", profile, "profile written to the dataset header")->capture_default_str();
  cutoffs->add_option("--out", out, "dataset file (default: stdout)");

  auto* gen = app.add_subcommand("gen", "generate loop-free evaluation code");
  auto* gen_n = gen->add_option("--n", orders, "orders (default: all in the dataset)");
  auto* gen_profile = gen->add_option("--profile", profile, "double or single (default: dataset profile)");
  gen->add_option("--namespace", ns, "namespace of the generated functions");
  gen->add_option("--in", in, "dataset file")->required();
  gen->add_option("--out", out, "header file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (fit->parsed()) {
      if (bits < 192) throw UsageError("--bits must be at least 192 for fitting");
      cli::FitRequest req;
      req.orders = orders_flag(orders);
      try {
        req.policy = cli::DegreePolicy::parse(degree);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--N: ") + e.what());
      }
      req.profile = profile_flag(profile);
      req.prec_bits = bits;
      req.gather = gather;
      req.threads = threads;
      const cli::FitOutcome res = cli::run_fit(req, &std::cerr);
      coeffs::save(res.dataset, std::filesystem::path(out));
      for (int n : res.failed_orders) std::cerr << "no accepted solution for n=" << n << '\n';
      code = res.failed_orders.empty() ? cli::kOk : cli::kFitRejected;
    } else if (scan->parsed()) {
      const coeffs::Dataset ds = coeffs::load(std::filesystem::path(in));
      const std::vector<int> ns_list = dataset_orders(ds, orders, scan_n->count() > 0);
      const int target = target_bits_for(ds, profile, scan_profile->count() > 0);
      const std::size_t p = dense ? cli::kDenseScanPoints : points;
      if (p == 0) throw UsageError("--points must be positive");
      std::ostringstream os;
      cli::write_report(os, cli::scan_dataset(ds, ns_list, p, target, threads));
      emit(out, os.str());
    } else if (table->parsed()) {
      std::vector<cli::ErrorReport> reports;
      for (const auto& path : inputs) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open '" + path + "'");
        reports.push_back(cli::read_report(f));
      }
      emit(out, cli::render_table(reports));
    } else if (qplot->parsed()) {
      const std::vector<int> n_list = orders_flag(orders);
      if (n_list.empty()) throw UsageError("--n must name at least one order");
      const int n_max = n_list.back();
      if (points == cli::kDefaultScanPoints) points = 129;
      if (points < 2 || !(x_max > 0)) throw UsageError("qplot needs --points >= 2 and --x-max > 0");
      if (bits < 64) throw UsageError("--bits must be at least 64");
      const refmath::Precision prec(bits);
      std::vector<Real> xs;
      for (std::size_t i = 0; i < points; ++i) {
        xs.push_back(Real(x_max, prec.mpfr_bits()) * static_cast<long>(i) / static_cast<long>(points - 1));
      }
      std::ostringstream os;
      refmath::write_tsv(os, refmath::fig1_samples(n_max, xs, prec), prec);
      emit(out, os.str());
    } else if (cutoffs->parsed()) {
      std::vector<int> b_list;
      try {
        b_list = cli::parse_orders(bits_list);
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--bits: ") + e.what());
      }
      for (int b : b_list) {
        if (b < 1 || b > 120) throw UsageError("cutoff bits must be in [1, 120]");
      }
      coeffs::Dataset ds;
      ds.profile = profile_flag(profile);
      ds.cutoffs = refmath::tabulate_cutoffs(orders_flag(orders), b_list, refmath::Precision(256));
      std::ostringstream os;
      coeffs::save(ds, os);
      emit(out, os.str());
    } else if (gen->parsed()) {
      coeffs::Dataset ds = coeffs::load(std::filesystem::path(in));
      if (gen_n->count() > 0) {
        const std::vector<int> keep = orders_flag(orders);
        for (int n : keep) ds.at(n);
        std::erase_if(ds.solutions, [&](const auto& kv) {
          return std::find(keep.begin(), keep.end(), kv.first) == keep.end();
        });
      }
      const int target = target_bits_for(ds, profile, gen_profile->count() > 0);
      if (target == 24) {
        emit(out, coeffs::gen_header(coeffs::build_kernel_table<float>(ds), ns.empty() ? "boys_single" : ns));
      } else {
        emit(out, coeffs::gen_header(coeffs::build_kernel_table<double>(ds), ns.empty() ? "boys_double" : ns));
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cli::kDataError;
  } catch (const MissingOrder& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cli::kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kDataError;
  }
  return code;
}
