#include <catch_amalgamated.hpp>

#include <cmath>

#include "../test_support.hpp"
#include "xnestcv/simulation.hpp"

using namespace xnestcv;

TEST_CASE("design generator moments") {
  SECTION("independent compound-symmetric columns at rho = 0") {
    std::mt19937_64 rng(301);
    Matrix x = gen_design(100000, 4, CovStructure::kCompoundSymmetric, 0.0,
                          rng);
    for (Index j = 0; j < 4; ++j) {
      CHECK(std::abs(x.col(j).mean()) <= 0.02);
      const double var =
          (x.col(j).array() - x.col(j).mean()).square().mean();
      CHECK(std::abs(var - 1.0) <= 0.02);
    }
    for (Index a = 0; a < 4; ++a)
      for (Index b = a + 1; b < 4; ++b) {
        const double cross =
            ((x.col(a).array() - x.col(a).mean()) *
             (x.col(b).array() - x.col(b).mean()))
                .mean();
        CHECK(std::abs(cross) <= 0.01);
      }
  }
  SECTION("compound-symmetric pairwise correlation near rho") {
    std::mt19937_64 rng(302);
    Matrix x =
        gen_design(100000, 6, CovStructure::kCompoundSymmetric, 0.025, rng);
    double acc = 0.0;
    int pairs = 0;
    for (Index a = 0; a < 6; ++a)
      for (Index b = a + 1; b < 6; ++b) {
        const double ca = x.col(a).mean(), cb = x.col(b).mean();
        const double cov =
            ((x.col(a).array() - ca) * (x.col(b).array() - cb)).mean();
        const double va = (x.col(a).array() - ca).square().mean();
        const double vb = (x.col(b).array() - cb).square().mean();
        acc += cov / std::sqrt(va * vb);
        ++pairs;
      }
    const double mean_corr = acc / pairs;
    CHECK(mean_corr >= 0.015);
    CHECK(mean_corr <= 0.035);
  }
  SECTION("heteroskedastic column variances grow logarithmically") {
    std::mt19937_64 rng(303);
    Matrix x = gen_design(100000, 5, CovStructure::kHeteroskedastic, 0.0, rng);
    for (Index j = 0; j < 5; ++j) {
      const double var =
          (x.col(j).array() - x.col(j).mean()).square().mean();
      const double want = std::log(static_cast<double>(j) + 2.0);
      CHECK(std::abs(var - want) / want <= 0.02);
    }
  }
  SECTION("invalid arguments rejected") {
    std::mt19937_64 rng(304);
    CHECK_THROWS_AS(
        gen_design(0, 3, CovStructure::kHeteroskedastic, 0.0, rng),
        InvalidInput);
    CHECK_THROWS_AS(
        gen_design(5, 3, CovStructure::kCompoundSymmetric, 1.0, rng),
        InvalidInput);
  }
}

TEST_CASE("response generator moments") {
  std::mt19937_64 rng(310);
  Matrix xf = gen_design(100000, 3, CovStructure::kCompoundSymmetric, 0.0, rng);
  SECTION("pure-noise response has the requested variance") {
    std::mt19937_64 rng2(311);
    Vector y = gen_response(xf, 0.0, 0.5, rng2);
    CHECK(std::abs(y.mean()) <= 0.02);
    const double var = (y.array() - y.mean()).square().mean();
    CHECK(std::abs(var - 0.5) / 0.5 <= 0.03);
  }
  SECTION("signal variance adds xi^2 per independent column") {
    std::mt19937_64 rng2(312);
    const double xi = 0.4;
    Vector y = gen_response(xf, xi, 0.5, rng2);
    const double want = xi * xi * 3.0 + 0.5;  // three unit-variance columns
    const double var = (y.array() - y.mean()).square().mean();
    CHECK(std::abs(var - want) / want <= 0.03);
  }
  SECTION("invalid noise variance rejected") {
    std::mt19937_64 rng2(313);
    CHECK_THROWS_AS(gen_response(xf, 0.0, 0.0, rng2), InvalidInput);
  }
}

TEST_CASE("sweep determinism") {
  SimConfig cfg;
  cfg.n = 14;
  cfg.b = 4;
  cfg.xis = {0.0, 0.6};
  cfg.seed = 99;
  cfg.tests = {"t1cv", "kfold"};
  cfg.grid_size = 8;
  SweepResult a = run_sweep(cfg);
  SweepResult b = run_sweep(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows.size() == 2 * 4 * 2);  // tests x replicates x signal levels
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].test == b.rows[i].test);
    CHECK(a.rows[i].xi == b.rows[i].xi);
    CHECK(a.rows[i].replicate == b.rows[i].replicate);
    CHECK(a.rows[i].p_value == b.rows[i].p_value);
    CHECK(a.rows[i].reject == b.rows[i].reject);
    CHECK(a.rows[i].avg_lambda == b.rows[i].avg_lambda);
  }
  SECTION("summary recomputes from the rows") {
    for (const SweepCell& cell : a.summary) {
      double rej = 0.0;
      Index count = 0;
      for (const SweepRow& row : a.rows) {
        if (row.test != cell.test || row.xi != cell.xi) continue;
        if (row.reject) rej += 1.0;
        ++count;
      }
      CHECK(count == cell.replicates);
      CHECK(cell.rejection_rate ==
            Catch::Approx(rej / static_cast<double>(count)).margin(1e-15));
    }
  }
}

TEST_CASE("strong heteroskedastic signal is detected coherently") {
  std::mt19937_64 rng(320);
  Matrix xf = gen_design(30, 30, CovStructure::kHeteroskedastic, 0.0, rng);
  Vector y = gen_response(xf, 0.9, 0.5, rng);
  Dataset ds = Dataset::from_features(xf, std::move(y));
  LambdaGrid grid = LambdaGrid::log_spaced(1e-3, 2500.0, 40);
  BatteryResult res = run_battery(ds, grid, 0.05);
  CHECK(res.t1cv.reject);
  CHECK(res.t2cv.reject);
  // the combined test should not be far less sensitive than its parts
  CHECK(res.hybrid.p_value <=
        std::max(res.t1cv.p_value, res.t2cv.p_value) + 0.05);
  CHECK(res.t1cv.delta_hat > 0.0);
}
