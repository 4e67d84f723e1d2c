#ifndef XNESTCV_CV_ESTIMATORS_HPP
#define XNESTCV_CV_ESTIMATORS_HPP

#include <cmath>
#include <utility>

#include "xnestcv/linalg.hpp"
#include "xnestcv/partitions.hpp"

namespace xnestcv {

// One exhaustive-CV evaluation: the average squared prediction error, the
// per-unit (or per-ordered-pair) loss vector behind it, and the per-partition
// selected lambdas when a nested selection produced them.
struct CvOutcome {
  double estimate = 0.0;
  Vector per_unit;
  Vector lambdas;  // empty for fixed-lambda and intercept-only estimators
};

// Position of ordered pair (predicted m, companion n) in the row-major
// zero-diagonal N x N table flattened to length N(N-1).
inline Index pair_index(Index m, Index n, Index size) {
  return m * (size - 1) + (n < m ? n : n - 1);
}

inline double sample_variance(const Vector& y) {
  const Index n = y.size();
  if (n < 2) throw InsufficientData("need at least two observations");
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(n - 1);
}

// Intercept-only exhaustive leave-n0-out CV. Collapses to a scaled sample
// variance: (1 + 1/(N - n0)) S^2 for n0 > 0 and ((N-1)/N) S^2 for n0 = 0.
inline CvOutcome null_ln0ocv(const Vector& y, Index n0) {
  const Index n = y.size();
  if (n < 2) throw InsufficientData("need at least two observations");
  if (n0 < 0 || n0 >= n) throw InvalidInput("n0 must be in [0, N)");
  const double s2 = sample_variance(y);
  const double mean = y.mean();
  CvOutcome out;
  if (n0 == 0) {
    out.estimate = s2 * static_cast<double>(n - 1) / static_cast<double>(n);
    out.per_unit = (y.array() - mean).square();
  } else {
    out.estimate = (1.0 + 1.0 / static_cast<double>(n - n0)) * s2;
    if (n0 == 1) {
      const double w = static_cast<double>(n) / static_cast<double>(n - 1);
      out.per_unit = (w * w) * (y.array() - mean).square();
    } else if (n0 == 2) {
      // Ordered-pair table: the held-out pair {m, n} contributes the term
      // for predicting m with companion n and vice versa.
      const double z0 = 1.0 / static_cast<double>(n - 2);
      const double z1 = 1.0 + z0;
      out.per_unit.resize(n * (n - 1));
      for (Index m = 0; m < n; ++m) {
        const double cm = y(m) - mean;
        for (Index c = 0; c < n; ++c) {
          if (c == m) continue;
          const double t = z1 * cm + z0 * (y(c) - mean);
          out.per_unit(pair_index(m, c, n)) = t * t;
        }
      }
    } else {
      out.per_unit = Vector::Constant(n, out.estimate);
    }
  }
  return out;
}

// Direct enumeration of all C(N, n0) held-out subsets against the training
// mean; the independent cross-check for null_ln0ocv.
inline double null_ln0ocv_oracle(const Vector& y, Index n0) {
  const Index n = y.size();
  if (n < 2) throw InsufficientData("need at least two observations");
  if (n0 < 0 || n0 >= n) throw InvalidInput("n0 must be in [0, N)");
  if (binomial(n, n0) > 1000000ull)
    throw TooManyPartitions("more than 1e6 held-out subsets");
  const double total_sum = y.sum();
  if (n0 == 0) {
    const double mean = total_sum / static_cast<double>(n);
    return (y.array() - mean).square().mean();
  }
  PartitionSpec spec = PartitionSpec::leave_out(n, n0);
  double acc = 0.0;
  spec.for_each_subset([&](const std::vector<Index>& idx) {
    double test_sum = 0.0;
    for (Index i : idx) test_sum += y(i);
    const double train_mean =
        (total_sum - test_sum) / static_cast<double>(n - n0);
    for (Index i : idx) {
      const double e = y(i) - train_mean;
      acc += e * e;
    }
  });
  return acc / (static_cast<double>(spec.count()) * static_cast<double>(n0));
}

// Closed-form exhaustive leave-n0-out CV for ridge at a fixed lambda: one hat
// matrix build, then per-partition solves on the held-out blocks.
inline CvOutcome ridge_ln0ocv_closed(const Dataset& ds, double lambda,
                                     const PartitionSpec& spec) {
  if (spec.n != ds.n()) throw InvalidInput("partition size mismatch");
  if (spec.n0 < 1) throw InvalidInput("need n0 >= 1 for held-out CV");
  SvdCache svd = svd_decompose(ds.x);
  if (lambda == 0.0 && svd.rank >= ds.n())
    throw InvalidLambda(
        "lambda = 0 with full-rank saturated design leaves no residual "
        "signal; use lambda > 0");
  RidgeContext ctx = ridge_context(ds, svd, lambda);
  const Index n = ds.n();
  const Index n0 = spec.n0;
  CvOutcome out;
  double acc = 0.0;
  if (n0 == 1) {
    out.per_unit.resize(n);
  } else if (n0 == 2) {
    out.per_unit.resize(n * (n - 1));
  }
  spec.for_each_subset([&](const std::vector<Index>& idx) {
    Vector q = submatrix_inverse_apply(ctx.hat, ctx.resid, idx);
    acc += q.squaredNorm();
    if (n0 == 1) {
      out.per_unit(idx[0]) = q(0) * q(0);
    } else if (n0 == 2) {
      out.per_unit(pair_index(idx[0], idx[1], n)) = q(0) * q(0);
      out.per_unit(pair_index(idx[1], idx[0], n)) = q(1) * q(1);
    }
  });
  out.estimate =
      acc / (static_cast<double>(spec.count()) * static_cast<double>(n0));
  if (n0 > 2) out.per_unit = Vector::Constant(n, out.estimate);
  return out;
}

// Minimum-norm / ridge coefficients for an arbitrary (not necessarily
// intercept-led) design; used by the refit oracles and the K-fold baseline.
inline Vector ridge_beta(const Matrix& x, const Vector& y, double lambda) {
  SvdCache svd = svd_decompose(x);
  Vector solve(svd.rank);
  for (Index i = 0; i < svd.rank; ++i) {
    const double d2 = svd.d(i) * svd.d(i);
    solve(i) = lambda == 0.0 ? 1.0 / svd.d(i) : svd.d(i) / (d2 + lambda);
  }
  return svd.v * (solve.asDiagonal() * (svd.u.transpose() * y));
}

// Brute-force oracle: refit ridge from scratch on every training subset and
// average the held-out squared errors.
inline double ridge_ln0ocv_oracle(const Dataset& ds, double lambda,
                                  const PartitionSpec& spec) {
  if (spec.n != ds.n()) throw InvalidInput("partition size mismatch");
  if (spec.count() > 100000ull)
    throw TooManyPartitions("more than 1e5 held-out subsets");
  const Index n = ds.n();
  const Index n0 = spec.n0;
  if (n0 == 0) {
    Vector beta = ridge_beta(ds.x, ds.y, lambda);
    return (ds.y - ds.x * beta).squaredNorm() / static_cast<double>(n);
  }
  double acc = 0.0;
  spec.for_each_subset([&](const std::vector<Index>& idx) {
    Matrix xtr(n - n0, ds.p());
    Vector ytr(n - n0);
    Index row = 0;
    std::size_t cursor = 0;
    for (Index i = 0; i < n; ++i) {
      if (cursor < idx.size() && idx[cursor] == i) {
        ++cursor;
        continue;
      }
      xtr.row(row) = ds.x.row(i);
      ytr(row) = ds.y(i);
      ++row;
    }
    Vector beta = ridge_beta(xtr, ytr, lambda);
    for (Index i : idx) {
      const double e = ds.y(i) - ds.x.row(i).dot(beta);
      acc += e * e;
    }
  });
  return acc / (static_cast<double>(spec.count()) * static_cast<double>(n0));
}

// Leave-one-out terms (r_n / (1 - h_nn))^2 for every unit.
inline Vector loocv_terms(const RidgeContext& ctx) {
  const Index n = ctx.hat.rows();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double denom = 1.0 - ctx.hat(i, i);
    if (!(denom > 1e-12))
      throw SingularTestBlock("leverage too close to one",
                              static_cast<long>(i));
    const double q = ctx.resid(i) / denom;
    out(i) = q * q;
  }
  return out;
}

// Leave-two-out terms for the held-out pair {m, n}: the squared prediction
// errors for m (companion n) and n (companion m), via the explicit 2x2
// inverse.
inline std::pair<double, double> l2ocv_pair_terms(const RidgeContext& ctx,
                                                  Index m, Index n) {
  if (m == n) throw InvalidInput("pair indices must differ");
  const double a = 1.0 - ctx.hat(m, m);
  const double b = 1.0 - ctx.hat(n, n);
  const double h = ctx.hat(m, n);
  const double det = a * b - h * h;
  const double half_tr = 0.5 * (a + b);
  const double disc = std::sqrt(0.25 * (a - b) * (a - b) + h * h);
  const double emax = half_tr + disc;
  const double emin = half_tr - disc;
  if (!(std::abs(emin) > 0.0) || std::abs(emax / emin) > 1e12)
    throw SingularTestBlock("I - H pair block numerically singular",
                            static_cast<long>(m));
  const double rm = ctx.resid(m);
  const double rn = ctx.resid(n);
  const double qm = (b * rm + h * rn) / det;
  const double qn = (h * rm + a * rn) / det;
  return {qm * qm, qn * qn};
}

// Independent weight-based expansion of the same pair contribution: the sum
// of the two ordered-pair terms built from the omega weights
//   w1_mn = [(1-h_mm)^2 + h_mn^2] / det^2
//   w2_mn = h_mn (2 - h_mm - h_nn) / det^2
// applied as w1_mn r_n^2 + w2_mn r_m r_n for each orientation. Equals
// t_m + t_n from l2ocv_pair_terms; the equality holds for the pair sum, not
// term by term.
inline double l2ocv_pair_sum_omega(const RidgeContext& ctx, Index m, Index n) {
  const double hmm = ctx.hat(m, m);
  const double hnn = ctx.hat(n, n);
  const double hmn = ctx.hat(m, n);
  const double det = (1.0 - hmm) * (1.0 - hnn) - hmn * hmn;
  const double det2 = det * det;
  const double rm = ctx.resid(m);
  const double rn = ctx.resid(n);
  const double w1_mn = ((1.0 - hmm) * (1.0 - hmm) + hmn * hmn) / det2;
  const double w1_nm = ((1.0 - hnn) * (1.0 - hnn) + hmn * hmn) / det2;
  const double w2 = hmn * (2.0 - hmm - hnn) / det2;
  return w1_mn * rn * rn + w2 * rm * rn + w1_nm * rm * rm + w2 * rm * rn;
}

}  // namespace xnestcv

#endif  // XNESTCV_CV_ESTIMATORS_HPP
