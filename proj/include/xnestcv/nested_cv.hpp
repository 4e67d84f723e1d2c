#ifndef XNESTCV_NESTED_CV_HPP
#define XNESTCV_NESTED_CV_HPP

#include <cmath>
#include <vector>

#include "xnestcv/cv_estimators.hpp"
#include "xnestcv/threading.hpp"

namespace xnestcv {

// Candidate regularization strengths for the inner selection loop.
struct LambdaGrid {
  Vector values;

  explicit LambdaGrid(Vector v) : values(std::move(v)) {
    if (values.size() == 0) throw InvalidInput("empty lambda grid");
    for (Index i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values(i)) || values(i) <= 0.0)
        throw InvalidInput("lambda grid entries must be finite and > 0");
      if (i > 0 && values(i) <= values(i - 1))
        throw InvalidInput("lambda grid must be strictly increasing");
    }
  }

  static LambdaGrid log_spaced(double lo, double hi, Index count) {
    Vector v(count);
    if (count == 1) {
      v(0) = lo;
    } else {
      const double llo = std::log(lo), lhi = std::log(hi);
      for (Index i = 0; i < count; ++i)
        v(i) = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                  static_cast<double>(count - 1));
    }
    return LambdaGrid(std::move(v));
  }

  static LambdaGrid default_grid() { return log_spaced(1e-3, 2500.0, 100); }
};

// Per-lambda fits shared read-only by every outer test set, plus the hat
// diagonals pulled out once for the inner-loop kernels.
struct GridContexts {
  std::vector<RidgeContext> ctx;
  std::vector<Vector> diag;
};

inline GridContexts build_contexts(const Dataset& ds, const LambdaGrid& grid,
                                   bool center_intercept = false) {
  GridContexts out;
  out.ctx.reserve(static_cast<std::size_t>(grid.values.size()));
  out.diag.reserve(static_cast<std::size_t>(grid.values.size()));
  if (center_intercept) {
    for (Index i = 0; i < grid.values.size(); ++i)
      out.ctx.push_back(ridge_context_centered(ds, grid.values(i)));
  } else {
    SvdCache svd = svd_decompose(ds.x);
    for (Index i = 0; i < grid.values.size(); ++i)
      out.ctx.push_back(ridge_context(ds, svd, grid.values(i)));
  }
  for (const RidgeContext& c : out.ctx) out.diag.push_back(c.hat.diagonal());
  return out;
}

struct NestedCvResult {
  CvOutcome outcome;
  Vector lambdas;  // one per outer test set
  double avg_lambda = 0.0;
};

// Inner leave-one-out criterion for outer unit n at one lambda: average over
// inner units m of the squared prediction error for m when {m, n} are both
// held out. Returns NaN when any pair block is numerically singular.
inline double inner_loocv_criterion(const RidgeContext& ctx,
                                    const Vector& diag, Index n) {
  const Index size = diag.size();
  const double b = 1.0 - diag(n);
  const double rn = ctx.resid(n);
  const double* hcol = ctx.hat.col(n).data();
  const double* r = ctx.resid.data();
  const double* hd = diag.data();
  double acc = 0.0;
  for (Index m = 0; m < size; ++m) {
    if (m == n) continue;
    const double a = 1.0 - hd[m];
    const double h = hcol[m];
    const double det = a * b - h * h;
    const double q = (b * r[m] + h * rn) / det;
    acc += q * q;
  }
  return acc / static_cast<double>(size - 1);
}

// Grid argmin with ties broken toward the largest lambda; non-finite
// criterion values disqualify that lambda. Returns the grid index.
template <typename CriterionFn>
inline Index grid_argmin(Index grid_size, CriterionFn&& crit_at,
                         long failure_index) {
  Index best = -1;
  double best_crit = 0.0;
  for (Index li = 0; li < grid_size; ++li) {
    const double c = crit_at(li);
    if (!std::isfinite(c)) continue;
    if (best < 0 || c <= best_crit) {
      best = li;
      best_crit = c;
    }
  }
  if (best < 0)
    throw NoFeasibleLambda("inner criterion non-finite at every lambda",
                           failure_index);
  return best;
}

inline Index inner_select_loocv_index(const GridContexts& gc, Index n) {
  const Index grid_size = static_cast<Index>(gc.ctx.size());
  return grid_argmin(
      grid_size,
      [&](Index li) {
        return inner_loocv_criterion(gc.ctx[static_cast<std::size_t>(li)],
                                     gc.diag[static_cast<std::size_t>(li)], n);
      },
      static_cast<long>(n));
}

inline double inner_select_loocv(const GridContexts& gc, Index n) {
  return gc.ctx[static_cast<std::size_t>(inner_select_loocv_index(gc, n))]
      .lambda;
}

// Inner leave-two-out criterion for outer pair {m, n} at one lambda: average
// over inner units v of the squared prediction error for v when {m, n, v} are
// held out, computed from the explicit 3x3 inverse (Cramer form).
inline double inner_l2ocv_criterion(const RidgeContext& ctx, const Vector& diag,
                                    Index m, Index n) {
  const Index size = diag.size();
  const double a = 1.0 - diag(m);
  const double b = 1.0 - diag(n);
  const double d = -ctx.hat(m, n);
  const double rm = ctx.resid(m);
  const double rn = ctx.resid(n);
  const double ab_d2 = a * b - d * d;
  const double* hm = ctx.hat.col(m).data();
  const double* hn = ctx.hat.col(n).data();
  const double* r = ctx.resid.data();
  const double* hd = diag.data();
  double acc = 0.0;
  for (Index v = 0; v < size; ++v) {
    if (v == m || v == n) continue;
    const double c = 1.0 - hd[v];
    const double e = -hm[v];
    const double f = -hn[v];
    const double df_be = d * f - b * e;
    const double de_af = d * e - a * f;
    const double det = a * (b * c - f * f) - d * (d * c - f * e) +
                       e * (d * f - b * e);
    const double q = (df_be * rm + de_af * rn + ab_d2 * r[v]) / det;
    acc += q * q;
  }
  return acc / static_cast<double>(size - 2);
}

inline Index inner_select_l2ocv_index(const GridContexts& gc, Index m,
                                      Index n) {
  const Index grid_size = static_cast<Index>(gc.ctx.size());
  return grid_argmin(
      grid_size,
      [&](Index li) {
        return inner_l2ocv_criterion(gc.ctx[static_cast<std::size_t>(li)],
                                     gc.diag[static_cast<std::size_t>(li)], m,
                                     n);
      },
      static_cast<long>(m));
}

inline double inner_select_l2ocv(const GridContexts& gc, Index m, Index n) {
  return gc.ctx[static_cast<std::size_t>(inner_select_l2ocv_index(gc, m, n))]
      .lambda;
}

// Exhaustive nested leave-one-out CV: per unit, the inner loop picks lambda
// on the remaining N-1 units, the outer loop scores the unit at that lambda.
inline NestedCvResult nested_loocv(const Dataset& ds, const LambdaGrid& grid,
                                   unsigned threads = 1,
                                   bool center_intercept = false) {
  const Index n = ds.n();
  if (n < 3) throw InsufficientData("nested leave-one-out CV needs N >= 3");
  GridContexts gc = build_contexts(ds, grid, center_intercept);
  NestedCvResult res;
  res.outcome.per_unit.resize(n);
  res.lambdas.resize(n);
  parallel_for(n, threads, [&](Index i) {
    const Index li = inner_select_loocv_index(gc, i);
    const RidgeContext& ctx = gc.ctx[static_cast<std::size_t>(li)];
    const double q = ctx.resid(i) / (1.0 - ctx.hat(i, i));
    res.outcome.per_unit(i) = q * q;
    res.lambdas(i) = ctx.lambda;
  });
  res.outcome.estimate = res.outcome.per_unit.mean();
  res.outcome.lambdas = res.lambdas;
  res.avg_lambda = res.lambdas.mean();
  return res;
}

// Exhaustive nested leave-two-out CV over all N(N-1)/2 held-out pairs; the
// per-unit table stores both ordered terms of each pair.
inline NestedCvResult nested_l2ocv(const Dataset& ds, const LambdaGrid& grid,
                                   unsigned threads = 1,
                                   bool center_intercept = false) {
  const Index n = ds.n();
  if (n < 4) throw InsufficientData("nested leave-two-out CV needs N >= 4");
  GridContexts gc = build_contexts(ds, grid, center_intercept);
  const Index pairs = n * (n - 1) / 2;
  NestedCvResult res;
  res.outcome.per_unit.resize(n * (n - 1));
  res.lambdas.resize(pairs);
  parallel_for(pairs, threads, [&](Index k) {
    // Unrank k into the pair (m, n), m < n, lexicographic.
    Index m = 0;
    Index rem = k;
    while (rem >= n - 1 - m) {
      rem -= n - 1 - m;
      ++m;
    }
    const Index nn = m + 1 + rem;
    const Index li = inner_select_l2ocv_index(gc, m, nn);
    const RidgeContext& ctx = gc.ctx[static_cast<std::size_t>(li)];
    auto [tm, tn] = l2ocv_pair_terms(ctx, m, nn);
    res.outcome.per_unit(pair_index(m, nn, n)) = tm;
    res.outcome.per_unit(pair_index(nn, m, n)) = tn;
    res.lambdas(k) = ctx.lambda;
  });
  res.outcome.estimate = res.outcome.per_unit.mean();
  res.outcome.lambdas = res.lambdas;
  res.avg_lambda = res.lambdas.mean();
  return res;
}

}  // namespace xnestcv

#endif  // XNESTCV_NESTED_CV_HPP
