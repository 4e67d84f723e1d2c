// Command-line front end: `test` runs the predictive-performance tests on a
// user dataset, `simulate` runs the rejection-rate experiment from a config
// file, `kfold-instability` sweeps fold seeds to expose decision flips.
//
// Exit codes: 0 success, 2 usage error, 3 ingest/config error, 4 numeric
// failure.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "xnestcv/xnestcv.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIngest = 3;
constexpr int kExitNumeric = 4;

struct GridOpts {
  double lo = 1e-3;
  double hi = 2500.0;
  long size = 100;
};

xnestcv::LambdaGrid make_grid(const GridOpts& g) {
  return xnestcv::LambdaGrid::log_spaced(g.lo, g.hi, g.size);
}

xnestcv::Dataset load_dataset(const std::string& x_path,
                              const std::string& y_path, int y_column) {
  xnestcv::Matrix features = xnestcv::read_matrix_csv(x_path);
  xnestcv::Vector y;
  if (!y_path.empty()) {
    y = xnestcv::read_vector_csv(y_path);
  } else {
    long col = y_column >= 0 ? y_column
                             : static_cast<long>(features.cols()) + y_column;
    if (col < 0 || col >= features.cols())
      throw xnestcv::IngestError("y column index out of range");
    y = features.col(col);
    xnestcv::Matrix rest(features.rows(), features.cols() - 1);
    rest.leftCols(col) = features.leftCols(col);
    rest.rightCols(features.cols() - 1 - col) =
        features.rightCols(features.cols() - 1 - col);
    features = rest;
  }
  if (features.rows() != y.size())
    throw xnestcv::IngestError(
        "feature rows (" + std::to_string(features.rows()) +
        ") do not match response length (" + std::to_string(y.size()) + ")");
  return xnestcv::Dataset::from_features(features, std::move(y));
}

std::string report_csv_line(const xnestcv::TestReport& r) {
  using xnestcv::format_double;
  return r.test + "," + format_double(r.statistic) + "," +
         std::to_string(r.df) + "," + format_double(r.p_value) + "," +
         format_double(r.lower_bound) + "," + format_double(r.delta_hat) +
         "," + format_double(r.avg_lambda) + "," + format_double(r.alpha) +
         "," + (r.reject ? "1" : "0");
}

void emit_reports(const std::vector<xnestcv::TestReport>& reports,
                  const std::string& output, const std::string& format) {
  std::string text;
  if (format == "csv") {
    text =
        "test,statistic,df,p_value,lower_bound,delta_hat_percent,avg_lambda,"
        "alpha,reject\n";
    for (const auto& r : reports) text += report_csv_line(r) + "\n";
  } else {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(xnestcv::report_to_json(r));
    text = (reports.size() == 1 ? arr[0].dump(2) : arr.dump(2)) + "\n";
  }
  std::cout << text;
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw xnestcv::IngestError("cannot write file: " + output);
    out << text;
  }
}

int run_test_cmd(const std::string& x_path, const std::string& y_path,
                 int y_column, const std::string& which, double alpha,
                 const GridOpts& gopts, bool center, const std::string& output,
                 const std::string& format, int threads, long kfold_k,
                 std::uint64_t kfold_seed) {
  xnestcv::Dataset ds = load_dataset(x_path, y_path, y_column);
  xnestcv::LambdaGrid grid = make_grid(gopts);
  const unsigned workers = xnestcv::resolve_threads(threads);
  std::vector<xnestcv::TestReport> reports;
  if (which == "all") {
    if (ds.n() < 4)
      throw xnestcv::InsufficientData("pair tests need N >= 4");
    xnestcv::BatteryResult battery =
        xnestcv::run_battery(ds, grid, alpha, workers, center);
    reports = {battery.t1cv, battery.t2cv, battery.hybrid, battery.wilcoxon};
  } else if (which == "t1cv") {
    reports.push_back(xnestcv::t1cv_from(
        ds.y, xnestcv::nested_loocv(ds, grid, workers, center), alpha));
  } else if (which == "t2cv") {
    if (ds.n() < 4)
      throw xnestcv::InsufficientData("pair tests need N >= 4");
    reports.push_back(xnestcv::t2cv_from(
        ds.y, xnestcv::nested_l2ocv(ds, grid, workers, center), alpha));
  } else if (which == "hybrid") {
    if (ds.n() < 4)
      throw xnestcv::InsufficientData("pair tests need N >= 4");
    reports.push_back(xnestcv::hybrid_from(
        ds.y, xnestcv::nested_loocv(ds, grid, workers, center),
        xnestcv::nested_l2ocv(ds, grid, workers, center), alpha));
  } else if (which == "wilcoxon") {
    xnestcv::NestedCvResult nl1 =
        xnestcv::nested_loocv(ds, grid, workers, center);
    xnestcv::PairedLossVectors pv;
    pv.t0 = xnestcv::null_ln0ocv(ds.y, 1).per_unit;
    pv.t1 = nl1.outcome.per_unit;
    pv.collapsed = pv.t0 - pv.t1;
    xnestcv::TestReport rep = xnestcv::wilcoxon_test(pv, alpha);
    rep.avg_lambda = nl1.avg_lambda;
    if (pv.t0.mean() > 0.0)
      rep.delta_hat = xnestcv::delta_hat(pv.t0.mean(), pv.t1.mean());
    reports.push_back(rep);
  } else if (which == "kfold") {
    reports.push_back(
        xnestcv::kfold_cv_test(ds, kfold_k, kfold_seed, grid, alpha));
  }
  emit_reports(reports, output, format);
  return kExitOk;
}

int run_simulate_cmd(const std::string& config_path,
                     const std::string& prefix) {
  xnestcv::SimConfig cfg = xnestcv::parse_sim_config(config_path);
  xnestcv::SweepResult sweep = xnestcv::run_sweep(cfg);
  xnestcv::write_sweep_rows_csv(prefix + "_replicates.csv", sweep);
  xnestcv::write_sweep_summary_csv(prefix + "_summary.csv", sweep);
  std::cout << "test,xi,rejection_rate,mean_delta,mean_avg_lambda,replicates"
            << "\n";
  for (const auto& c : sweep.summary)
    std::cout << c.test << "," << xnestcv::format_double(c.xi) << ","
              << xnestcv::format_double(c.rejection_rate) << ","
              << xnestcv::format_double(c.mean_delta) << ","
              << xnestcv::format_double(c.mean_avg_lambda) << ","
              << c.replicates << "\n";
  return kExitOk;
}

int run_instability_cmd(const std::string& x_path, const std::string& y_path,
                        int y_column, long k, long seeds,
                        std::uint64_t base_seed, double alpha,
                        const GridOpts& gopts, const std::string& output) {
  xnestcv::Dataset ds = load_dataset(x_path, y_path, y_column);
  xnestcv::LambdaGrid grid = make_grid(gopts);
  std::string text = "seed,statistic,p_value,reject\n";
  long rejections = 0;
  for (long s = 1; s <= seeds; ++s) {
    xnestcv::TestReport rep = xnestcv::kfold_cv_test(
        ds, k, base_seed + static_cast<std::uint64_t>(s), grid, alpha);
    if (rep.reject) ++rejections;
    text += std::to_string(base_seed + static_cast<std::uint64_t>(s)) + "," +
            xnestcv::format_double(rep.statistic) + "," +
            xnestcv::format_double(rep.p_value) + "," +
            (rep.reject ? "1" : "0") + "\n";
  }
  std::cout << text;
  const double fraction =
      static_cast<double>(rejections) / static_cast<double>(seeds);
  std::cout << "rejection_fraction=" << xnestcv::format_double(fraction)
            << "\n";
  if (!output.empty()) {
    std::ofstream out(output);
    if (!out) throw xnestcv::IngestError("cannot write file: " + output);
    out << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Exhaustive nested cross-validation estimators and predictive "
      "performance tests for ridge regression"};
  app.require_subcommand(1);

  // test
  std::string x_path, y_path, output, format = "json", which = "all";
  int y_column = -1;
  bool have_y_column = false;
  double alpha = 0.05;
  GridOpts gopts;
  bool center = false;
  int threads = 0;
  long kfold_k = 5;
  std::uint64_t kfold_seed = 8891;

  CLI::App* test_cmd =
      app.add_subcommand("test", "Run predictive-performance tests on a CSV");
  test_cmd->add_option("--x", x_path, "Feature matrix CSV/TSV (rows = units)")
      ->required();
  auto* yopt = test_cmd->add_option("--y", y_path, "Response CSV (one column)");
  test_cmd->add_option("--y-column", y_column,
                       "0-based column of --x to use as the response")
      ->excludes(yopt)
      ->each([&](const std::string&) { have_y_column = true; });
  test_cmd->add_option("--test", which, "t1cv|t2cv|hybrid|wilcoxon|kfold|all")
      ->check(CLI::IsMember({"t1cv", "t2cv", "hybrid", "wilcoxon", "kfold",
                             "all"}));
  test_cmd->add_option("--alpha", alpha, "Significance level")
      ->check(CLI::Range(1e-12, 0.999999));
  test_cmd->add_option("--grid-min", gopts.lo, "Smallest lambda");
  test_cmd->add_option("--grid-max", gopts.hi, "Largest lambda");
  test_cmd->add_option("--grid-size", gopts.size, "Lambda grid size");
  test_cmd->add_flag("--center", center,
                     "Leave the intercept unpenalized (centered fit)");
  test_cmd->add_option("--output", output, "Write the report here as well");
  test_cmd->add_option("--format", format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
  test_cmd->add_option("--threads", threads, "Worker threads (0 = auto)");
  test_cmd->add_option("--kfold-k", kfold_k, "Folds for --test kfold");
  test_cmd->add_option("--kfold-seed", kfold_seed, "Fold shuffle seed");

  // simulate
  std::string config_path, prefix = "sweep";
  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Run the rejection-rate experiment from a config file");
  sim_cmd->add_option("config", config_path, "key = value config file")
      ->required();
  sim_cmd->add_option("--out-prefix", prefix,
                      "Prefix for the replicate and summary CSVs");

  // kfold-instability
  std::string ix_path, iy_path, ioutput;
  int iy_column = -1;
  long ik = 5, iseeds = 100;
  std::uint64_t ibase_seed = 8891;
  double ialpha = 0.05;
  GridOpts igopts;
  CLI::App* inst_cmd = app.add_subcommand(
      "kfold-instability",
      "Sweep fold seeds for the K-fold test and report the decision split");
  inst_cmd->add_option("--x", ix_path, "Feature matrix CSV/TSV")->required();
  inst_cmd->add_option("--y", iy_path, "Response CSV (one column)");
  inst_cmd->add_option("--y-column", iy_column,
                       "0-based column of --x to use as the response");
  inst_cmd->add_option("--k", ik, "Fold count")->check(CLI::Range(2l, 100000l));
  inst_cmd->add_option("--seeds", iseeds, "Number of fold seeds")
      ->check(CLI::Range(1l, 1000000l));
  inst_cmd->add_option("--base-seed", ibase_seed, "Base fold seed");
  inst_cmd->add_option("--alpha", ialpha, "Significance level");
  inst_cmd->add_option("--grid-min", igopts.lo, "Smallest lambda");
  inst_cmd->add_option("--grid-max", igopts.hi, "Largest lambda");
  inst_cmd->add_option("--grid-size", igopts.size, "Lambda grid size");
  inst_cmd->add_option("--output", ioutput, "Write the per-seed CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (test_cmd->parsed()) {
      if (y_path.empty() && !have_y_column)
        throw CLI::ValidationError("test", "one of --y or --y-column required");
      return run_test_cmd(x_path, y_path, y_column, which, alpha, gopts,
                          center, output, format, threads, kfold_k,
                          kfold_seed);
    }
    if (sim_cmd->parsed()) return run_simulate_cmd(config_path, prefix);
    if (inst_cmd->parsed())
      return run_instability_cmd(ix_path, iy_path, iy_column, ik, iseeds,
                                 ibase_seed, ialpha, igopts, ioutput);
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const xnestcv::IngestError& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return kExitIngest;
  } catch (const xnestcv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitIngest;
  } catch (const xnestcv::Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
