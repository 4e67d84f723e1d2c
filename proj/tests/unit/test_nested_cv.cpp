#include <algorithm>
#include <catch_amalgamated.hpp>
#include <numeric>
#include <random>

#include "../test_support.hpp"
#include "xnestcv/nested_cv.hpp"

using namespace xnestcv;
using testsupport::random_dataset;
using testsupport::random_vector;
using testsupport::rel_err;

namespace {

Vector grid_vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

// Reference implementation of the inner leave-one-out criterion by literal
// double refits.
double inner_loocv_refit(const Dataset& ds, double lambda, Index n) {
  const Index size = ds.n();
  double acc = 0.0;
  for (Index m = 0; m < size; ++m) {
    if (m == n) continue;
    Matrix xtr(size - 2, ds.p());
    Vector ytr(size - 2);
    Index row = 0;
    for (Index i = 0; i < size; ++i) {
      if (i == m || i == n) continue;
      xtr.row(row) = ds.x.row(i);
      ytr(row) = ds.y(i);
      ++row;
    }
    Vector beta = ridge_beta(xtr, ytr, lambda);
    const double e = ds.y(m) - ds.x.row(m).dot(beta);
    acc += e * e;
  }
  return acc / static_cast<double>(size - 1);
}

double inner_l2ocv_refit(const Dataset& ds, double lambda, Index m, Index n) {
  const Index size = ds.n();
  double acc = 0.0;
  for (Index v = 0; v < size; ++v) {
    if (v == m || v == n) continue;
    Matrix xtr(size - 3, ds.p());
    Vector ytr(size - 3);
    Index row = 0;
    for (Index i = 0; i < size; ++i) {
      if (i == m || i == n || i == v) continue;
      xtr.row(row) = ds.x.row(i);
      ytr(row) = ds.y(i);
      ++row;
    }
    Vector beta = ridge_beta(xtr, ytr, lambda);
    const double e = ds.y(v) - ds.x.row(v).dot(beta);
    acc += e * e;
  }
  return acc / static_cast<double>(size - 2);
}

}  // namespace

TEST_CASE("lambda grid validation") {
  CHECK_THROWS_AS(LambdaGrid(grid_vec({1.0, 0.5})), InvalidInput);
  CHECK_THROWS_AS(LambdaGrid(grid_vec({0.0, 1.0})), InvalidInput);
  CHECK_THROWS_AS(LambdaGrid(Vector()), InvalidInput);
  LambdaGrid def = LambdaGrid::default_grid();
  CHECK(def.values.size() == 100);
  CHECK(def.values(0) == Catch::Approx(1e-3));
  CHECK(def.values(99) == Catch::Approx(2500.0));
}

TEST_CASE("inner selection for single held-out units") {
  SECTION("singleton grid is returned unchanged") {
    Dataset ds = random_dataset(6, 10, 70);
    GridContexts gc = build_contexts(ds, LambdaGrid(grid_vec({3.0})));
    CHECK(inner_select_loocv(gc, 2) == 3.0);
  }
  SECTION("criterion matches the double-refit oracle") {
    Dataset ds = random_dataset(8, 16, 71);
    LambdaGrid grid(grid_vec({0.5, 2.0, 20.0}));
    GridContexts gc = build_contexts(ds, grid);
    for (Index li = 0; li < 3; ++li)
      for (Index n = 0; n < 8; ++n) {
        const double closed = inner_loocv_criterion(gc.ctx[li], gc.diag[li], n);
        const double oracle = inner_loocv_refit(ds, grid.values(li), n);
        CHECK(rel_err(closed, oracle) <= 1e-8);
      }
  }
  SECTION("argmin follows the oracle criterion") {
    Dataset ds = random_dataset(8, 16, 72);
    LambdaGrid grid(grid_vec({0.5, 2.0}));
    GridContexts gc = build_contexts(ds, grid);
    for (Index n = 0; n < 8; ++n) {
      const double c0 = inner_loocv_refit(ds, 0.5, n);
      const double c1 = inner_loocv_refit(ds, 2.0, n);
      const double expected = c0 < c1 ? 0.5 : 2.0;
      CHECK(inner_select_loocv(gc, n) == expected);
    }
  }
}

TEST_CASE("inner selection for held-out pairs") {
  Dataset ds = random_dataset(6, 8, 80);
  SECTION("singleton grid") {
    GridContexts gc = build_contexts(ds, LambdaGrid(grid_vec({7.0})));
    CHECK(inner_select_l2ocv(gc, 0, 3) == 7.0);
  }
  SECTION("criterion matches the triple-refit oracle") {
    LambdaGrid grid(grid_vec({0.5, 5.0, 50.0}));
    GridContexts gc = build_contexts(ds, grid);
    for (Index li = 0; li < 3; ++li)
      for (Index m = 0; m < 6; ++m)
        for (Index n = m + 1; n < 6; ++n) {
          const double closed =
              inner_l2ocv_criterion(gc.ctx[li], gc.diag[li], m, n);
          const double oracle = inner_l2ocv_refit(ds, grid.values(li), m, n);
          CHECK(rel_err(closed, oracle) <= 1e-8);
        }
  }
  SECTION("selection is symmetric in the pair") {
    GridContexts gc = build_contexts(ds, LambdaGrid(grid_vec({0.5, 5.0, 50.0})));
    for (Index m = 0; m < 6; ++m)
      for (Index n = m + 1; n < 6; ++n)
        CHECK(inner_select_l2ocv(gc, m, n) == inner_select_l2ocv(gc, n, m));
  }
}

TEST_CASE("nested leave-one-out estimator") {
  SECTION("degenerate feature column reduces to the intercept-only value") {
    Vector y = random_vector(12, 90);
    Matrix features = Matrix::Zero(12, 1);
    Dataset ds = Dataset::from_features(features, y);
    // tiny lambdas: the fit is numerically the plain training mean
    LambdaGrid grid(grid_vec({1e-12, 1e-11, 1e-10}));
    NestedCvResult res = nested_loocv(ds, grid);
    CHECK(std::abs(res.outcome.estimate - null_ln0ocv(y, 1).estimate) <= 1e-9);
  }
  SECTION("equals the naive nested double loop") {
    LambdaGrid grid(grid_vec({0.5, 5.0, 50.0}));
    for (std::uint64_t seed : {91, 92, 93}) {
      Dataset ds = random_dataset(8, 16, seed);
      NestedCvResult res = nested_loocv(ds, grid);
      for (Index n = 0; n < 8; ++n) {
        double best_crit = 0.0;
        double best_lambda = 0.0;
        for (Index li = 0; li < 3; ++li) {
          const double c = inner_loocv_refit(ds, grid.values(li), n);
          if (li == 0 || c <= best_crit) {
            best_crit = c;
            best_lambda = grid.values(li);
          }
        }
        CHECK(res.lambdas(n) == best_lambda);
        // outer refit at the selected lambda
        Matrix xtr(7, ds.p());
        Vector ytr(7);
        Index row = 0;
        for (Index i = 0; i < 8; ++i) {
          if (i == n) continue;
          xtr.row(row) = ds.x.row(i);
          ytr(row) = ds.y(i);
          ++row;
        }
        Vector beta = ridge_beta(xtr, ytr, best_lambda);
        const double e = ds.y(n) - ds.x.row(n).dot(beta);
        CHECK(rel_err(res.outcome.per_unit(n), e * e) <= 1e-8);
      }
    }
  }
  SECTION("row permutation leaves the estimate unchanged") {
    Dataset ds = random_dataset(9, 15, 94);
    LambdaGrid grid(grid_vec({0.5, 5.0, 50.0}));
    const double base = nested_loocv(ds, grid).outcome.estimate;
    std::vector<Index> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(7);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix xp(9, ds.p());
    Vector yp(9);
    for (Index i = 0; i < 9; ++i) {
      xp.row(i) = ds.x.row(perm[static_cast<std::size_t>(i)]);
      yp(i) = ds.y(perm[static_cast<std::size_t>(i)]);
    }
    Dataset permuted(yp, xp);
    CHECK(nested_loocv(permuted, grid).outcome.estimate ==
          Catch::Approx(base).epsilon(1e-12));
  }
  SECTION("selected lambdas are grid members and averaged correctly") {
    Dataset ds = random_dataset(7, 12, 95);
    LambdaGrid grid = LambdaGrid::log_spaced(1e-2, 100.0, 7);
    NestedCvResult res = nested_loocv(ds, grid);
    for (Index n = 0; n < 7; ++n) {
      bool member = false;
      for (Index li = 0; li < 7; ++li)
        if (res.lambdas(n) == grid.values(li)) member = true;
      CHECK(member);
    }
    CHECK(std::abs(res.avg_lambda - res.lambdas.mean()) <= 1e-12);
    CHECK(std::abs(res.outcome.estimate - res.outcome.per_unit.mean()) <=
          1e-10);
  }
}

TEST_CASE("nested leave-two-out estimator") {
  SECTION("equals the naive nested triple loop") {
    LambdaGrid grid(grid_vec({0.5, 5.0, 50.0}));
    Dataset ds = random_dataset(7, 10, 96);
    NestedCvResult res = nested_l2ocv(ds, grid);
    for (Index m = 0; m < 7; ++m)
      for (Index n = m + 1; n < 7; ++n) {
        double best_crit = 0.0;
        double best_lambda = 0.0;
        for (Index li = 0; li < 3; ++li) {
          const double c = inner_l2ocv_refit(ds, grid.values(li), m, n);
          if (li == 0 || c <= best_crit) {
            best_crit = c;
            best_lambda = grid.values(li);
          }
        }
        Matrix xtr(5, ds.p());
        Vector ytr(5);
        Index row = 0;
        for (Index i = 0; i < 7; ++i) {
          if (i == m || i == n) continue;
          xtr.row(row) = ds.x.row(i);
          ytr(row) = ds.y(i);
          ++row;
        }
        Vector beta = ridge_beta(xtr, ytr, best_lambda);
        const double em = ds.y(m) - ds.x.row(m).dot(beta);
        const double en = ds.y(n) - ds.x.row(n).dot(beta);
        CHECK(rel_err(res.outcome.per_unit(pair_index(m, n, 7)), em * em) <=
              1e-8);
        CHECK(rel_err(res.outcome.per_unit(pair_index(n, m, 7)), en * en) <=
              1e-8);
      }
  }
  SECTION("singleton grid reduces to the fixed-lambda closed form") {
    Dataset ds = random_dataset(8, 14, 97);
    NestedCvResult res = nested_l2ocv(ds, LambdaGrid(grid_vec({2.0})));
    CvOutcome fixed =
        ridge_ln0ocv_closed(ds, 2.0, PartitionSpec::leave_out(8, 2));
    CHECK((res.outcome.per_unit - fixed.per_unit).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK(res.outcome.estimate ==
          Catch::Approx(fixed.estimate).epsilon(1e-12));
  }
  SECTION("row permutation leaves the estimate unchanged") {
    Dataset ds = random_dataset(7, 12, 98);
    LambdaGrid grid(grid_vec({0.5, 5.0, 50.0}));
    const double base = nested_l2ocv(ds, grid).outcome.estimate;
    Matrix xp(7, ds.p());
    Vector yp(7);
    for (Index i = 0; i < 7; ++i) {
      xp.row(i) = ds.x.row(6 - i);
      yp(i) = ds.y(6 - i);
    }
    Dataset reversed(yp, xp);
    CHECK(nested_l2ocv(reversed, grid).outcome.estimate ==
          Catch::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("context reuse and worker count do not change results") {
  Dataset ds = random_dataset(8, 12, 99);
  LambdaGrid grid = LambdaGrid::log_spaced(0.1, 100.0, 10);
  NestedCvResult serial = nested_loocv(ds, grid, 1);
  NestedCvResult threaded = nested_loocv(ds, grid, 4);
  CHECK((serial.outcome.per_unit - threaded.outcome.per_unit)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((serial.lambdas - threaded.lambdas).cwiseAbs().maxCoeff() == 0.0);
  NestedCvResult pair_serial = nested_l2ocv(ds, grid, 1);
  NestedCvResult pair_threaded = nested_l2ocv(ds, grid, 4);
  CHECK((pair_serial.outcome.per_unit - pair_threaded.outcome.per_unit)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  // recomputing contexts from scratch is bit-identical
  NestedCvResult again = nested_loocv(ds, grid, 1);
  CHECK((serial.outcome.per_unit - again.outcome.per_unit)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(serial.outcome.estimate == again.outcome.estimate);
}
