#ifndef XNESTCV_SIMULATION_HPP
#define XNESTCV_SIMULATION_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xnestcv/hypothesis_tests.hpp"

namespace xnestcv {

enum class CovStructure { kCompoundSymmetric, kHeteroskedastic };

inline std::string cov_name(CovStructure cov) {
  return cov == CovStructure::kCompoundSymmetric ? "compound_symmetric"
                                                 : "heteroskedastic";
}

// splitmix64 step; used to derive independent per-replicate RNG streams from
// (seed, replicate) so replicate order and worker count never matter.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Feature matrix with i.i.d. Gaussian rows. Compound symmetric covariance
// (correlation rho, unit variances) uses a shared-factor construction;
// heteroskedastic uses independent columns with variance log(j + 1).
inline Matrix gen_design(Index n, Index p_features, CovStructure cov,
                         double rho, std::mt19937_64& rng) {
  if (n < 1 || p_features < 1) throw InvalidInput("need n >= 1, p >= 1");
  if (cov == CovStructure::kCompoundSymmetric && (rho < 0.0 || rho >= 1.0))
    throw InvalidInput("compound-symmetric rho must be in [0, 1)");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(n, p_features);
  if (cov == CovStructure::kCompoundSymmetric) {
    const double a = std::sqrt(rho);
    const double b = std::sqrt(1.0 - rho);
    for (Index i = 0; i < n; ++i) {
      const double shared = normal(rng);
      for (Index j = 0; j < p_features; ++j)
        x(i, j) = a * shared + b * normal(rng);
    }
  } else {
    std::vector<double> scale(static_cast<std::size_t>(p_features));
    for (Index j = 0; j < p_features; ++j)
      scale[static_cast<std::size_t>(j)] =
          std::sqrt(std::log(static_cast<double>(j) + 2.0));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p_features; ++j)
        x(i, j) = scale[static_cast<std::size_t>(j)] * normal(rng);
  }
  return x;
}

// y = X_features * (xi * 1) + eps, eps ~ N(0, sigma2_eps). The intercept
// coefficient is zero: a constant shift is absorbed by the intercept-only
// null and affects nothing testable.
inline Vector gen_response(const Matrix& x_features, double xi,
                           double sigma2_eps, std::mt19937_64& rng) {
  if (!(sigma2_eps > 0.0)) throw InvalidInput("sigma2_eps must be > 0");
  std::normal_distribution<double> normal(0.0, std::sqrt(sigma2_eps));
  Vector y = xi * x_features.rowwise().sum();
  for (Index i = 0; i < y.size(); ++i) y(i) += normal(rng);
  return y;
}

struct SimConfig {
  Index n = 50;
  double gamma = 1.0;  // P = round(gamma * N), with P = N + 1 at gamma = 1
  CovStructure cov = CovStructure::kCompoundSymmetric;
  std::vector<double> xis;  // empty = the default signal grid for cov
  double rho = 0.025;
  double sigma2_eps = 0.5;
  Index b = 200;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  std::vector<std::string> tests = {"t1cv", "t2cv", "hybrid", "wilcoxon",
                                    "kfold"};
  Index kfold_k = 5;
  Index grid_size = 100;
  unsigned threads = 1;

  Index p_features() const {
    if (gamma == 1.0) return n;  // P = N + 1 including the intercept
    return static_cast<Index>(std::lround(gamma * static_cast<double>(n))) - 1;
  }

  std::vector<double> xi_grid() const {
    if (!xis.empty()) return xis;
    const double step =
        cov == CovStructure::kCompoundSymmetric ? 0.05 : 0.1;
    std::vector<double> grid;
    for (int a = 0; a <= 9; ++a) grid.push_back(step * a);
    return grid;
  }

  void validate() const {
    if (n < 5) throw InvalidInput("simulation needs n >= 5");
    if (b < 1) throw InvalidInput("need at least one replicate");
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha not in (0,1)");
    if (!(sigma2_eps > 0.0)) throw InvalidInput("sigma2_eps must be > 0");
    if (!std::isfinite(gamma) || gamma < 1.0)
      throw InvalidInput("gamma must be >= 1");
    for (double xi : xis)
      if (!std::isfinite(xi) || xi < 0.0)
        throw InvalidInput("xi values must be finite and >= 0");
    if (tests.empty()) throw InvalidInput("no tests requested");
    for (const std::string& t : tests)
      if (t != "t1cv" && t != "t2cv" && t != "hybrid" && t != "wilcoxon" &&
          t != "kfold")
        throw InvalidInput("unknown test: " + t);
  }
};

struct SweepRow {
  std::string test;
  double xi;
  Index replicate;
  double p_value;
  bool reject;
  double delta_hat;
  double avg_lambda;
  // not part of the CSV schema; kept for decision audits
  double lower_bound;
  bool degenerate;
};

struct SweepCell {
  std::string test;
  double xi;
  double rejection_rate;
  double mean_delta;
  double mean_avg_lambda;
  Index replicates;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepCell> summary;
};

namespace detail {

inline bool wants(const SimConfig& cfg, const std::string& name) {
  for (const std::string& t : cfg.tests)
    if (t == name) return true;
  return false;
}

}  // namespace detail

// Full rejection-rate experiment: for each signal level and replicate, draw a
// fresh dataset and evaluate every requested test. Deterministic given the
// seed; replicate r at grid position g uses an independent derived stream.
inline SweepResult run_sweep(const SimConfig& cfg) {
  cfg.validate();
  const std::vector<double> xi_grid = cfg.xi_grid();
  const LambdaGrid grid = LambdaGrid::log_spaced(1e-3, 2500.0, cfg.grid_size);
  SweepResult out;

  const bool any_exhaustive =
      detail::wants(cfg, "t1cv") || detail::wants(cfg, "t2cv") ||
      detail::wants(cfg, "hybrid") || detail::wants(cfg, "wilcoxon");
  const bool needs_pairs =
      detail::wants(cfg, "t2cv") || detail::wants(cfg, "hybrid");

  for (std::size_t g = 0; g < xi_grid.size(); ++g) {
    const double xi = xi_grid[g];
    std::vector<std::vector<SweepRow>> replicate_rows(
        static_cast<std::size_t>(cfg.b));
    parallel_for(cfg.b, cfg.threads, [&](Index r) {
      std::mt19937_64 rng(mix_seed(
          cfg.seed, static_cast<std::uint64_t>(g) * 1000003ull +
                        static_cast<std::uint64_t>(r)));
      Matrix xf = gen_design(cfg.n, cfg.p_features(), cfg.cov, cfg.rho, rng);
      Vector y = gen_response(xf, xi, cfg.sigma2_eps, rng);
      Dataset ds = Dataset::from_features(xf, std::move(y));
      std::vector<SweepRow>& rows =
          replicate_rows[static_cast<std::size_t>(r)];
      auto push = [&](const TestReport& rep) {
        rows.push_back({rep.test, xi, r, rep.p_value, rep.reject,
                        rep.delta_hat, rep.avg_lambda, rep.lower_bound,
                        rep.degenerate});
      };
      if (any_exhaustive) {
        NestedCvResult nl1 = nested_loocv(ds, grid);
        if (detail::wants(cfg, "t1cv")) push(t1cv_from(ds.y, nl1, cfg.alpha));
        if (detail::wants(cfg, "wilcoxon")) {
          PairedLossVectors pv;
          pv.t0 = null_ln0ocv(ds.y, 1).per_unit;
          pv.t1 = nl1.outcome.per_unit;
          pv.collapsed = pv.t0 - pv.t1;
          TestReport rep = wilcoxon_test(pv, cfg.alpha);
          rep.avg_lambda = nl1.avg_lambda;
          if (pv.t0.mean() > 0.0)
            rep.delta_hat = delta_hat(pv.t0.mean(), pv.t1.mean());
          push(rep);
        }
        if (needs_pairs) {
          NestedCvResult nl2 = nested_l2ocv(ds, grid);
          if (detail::wants(cfg, "t2cv"))
            push(t2cv_from(ds.y, nl2, cfg.alpha));
          if (detail::wants(cfg, "hybrid"))
            push(hybrid_from(ds.y, nl1, nl2, cfg.alpha));
        }
      }
      if (detail::wants(cfg, "kfold"))
        push(kfold_cv_test(ds, cfg.kfold_k,
                           mix_seed(cfg.seed + 0x5eedull,
                                    static_cast<std::uint64_t>(g) * 1000003ull +
                                        static_cast<std::uint64_t>(r)),
                           grid, cfg.alpha));
    });
    // deterministic ordered fold over replicate index
    for (Index r = 0; r < cfg.b; ++r)
      for (const SweepRow& row : replicate_rows[static_cast<std::size_t>(r)])
        out.rows.push_back(row);
    for (const std::string& t : cfg.tests) {
      SweepCell cell;
      cell.test = t;
      cell.xi = xi;
      cell.replicates = cfg.b;
      double rejections = 0.0, dsum = 0.0, lsum = 0.0;
      for (const SweepRow& row : out.rows) {
        if (row.test != t || row.xi != xi) continue;
        if (row.reject) rejections += 1.0;
        dsum += row.delta_hat;
        lsum += row.avg_lambda;
      }
      cell.rejection_rate = rejections / static_cast<double>(cfg.b);
      cell.mean_delta = dsum / static_cast<double>(cfg.b);
      cell.mean_avg_lambda = lsum / static_cast<double>(cfg.b);
      out.summary.push_back(cell);
    }
  }
  return out;
}

}  // namespace xnestcv

#endif  // XNESTCV_SIMULATION_HPP
