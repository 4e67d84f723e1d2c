#ifndef XNESTCV_LINALG_HPP
#define XNESTCV_LINALG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "xnestcv/dataset.hpp"
#include "xnestcv/errors.hpp"

namespace xnestcv {

// Thin SVD of the design, truncated at tol = max(N,P) * eps * d_max.
struct SvdCache {
  Matrix u;  // N x R
  Vector d;  // R, descending, > 0
  Matrix v;  // P x R
  Index rank;
};

inline SvdCache svd_decompose(const Matrix& x) {
  if (x.size() == 0) throw InvalidInput("empty design matrix");
  if (!x.allFinite()) throw InvalidInput("non-finite value in design matrix");
  Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(x.rows(), x.cols())) *
                     std::numeric_limits<double>::epsilon() *
                     (sv.size() > 0 ? sv(0) : 0.0);
  Index r = 0;
  while (r < sv.size() && sv(r) > tol) ++r;
  SvdCache out;
  out.rank = r;
  out.u = svd.matrixU().leftCols(r);
  out.d = sv.head(r);
  out.v = svd.matrixV().leftCols(r);
  return out;
}

// One ridge fit at a fixed lambda: hat matrix, residuals, coefficients.
// lambda = 0 falls back to the minimum-norm least-squares fit on the
// retained singular components.
struct RidgeContext {
  double lambda;
  Matrix hat;    // N x N, symmetric
  Vector resid;  // y - hat * y
  Vector beta;   // P
};

inline RidgeContext ridge_context_raw(const Vector& y, const SvdCache& svd,
                                      double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw InvalidLambda("lambda must be finite and >= 0");
  const Index r = svd.rank;
  Vector shrink(r);   // d^2 / (d^2 + lambda) per component
  Vector solve(r);    // d / (d^2 + lambda), or 1/d at lambda = 0
  for (Index i = 0; i < r; ++i) {
    const double d2 = svd.d(i) * svd.d(i);
    if (lambda == 0.0) {
      shrink(i) = 1.0;
      solve(i) = 1.0 / svd.d(i);
    } else {
      shrink(i) = d2 / (d2 + lambda);
      solve(i) = svd.d(i) / (d2 + lambda);
    }
  }
  RidgeContext ctx;
  ctx.lambda = lambda;
  ctx.hat = svd.u * shrink.asDiagonal() * svd.u.transpose();
  Vector uty = svd.u.transpose() * y;
  ctx.beta = svd.v * (solve.asDiagonal() * uty);
  ctx.resid = y - ctx.hat * y;
  return ctx;
}

inline RidgeContext ridge_context(const Dataset& ds, const SvdCache& svd,
                                  double lambda) {
  return ridge_context_raw(ds.y, svd, lambda);
}

// Unpenalized-intercept variant: center y and the feature columns, ridge on
// the centered features, recover the intercept from the means. The smoother
// is hat = (1/N) J + H_c(lambda), still symmetric with spectrum in [0, 1].
inline RidgeContext ridge_context_centered(const Dataset& ds, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw InvalidLambda("lambda must be finite and >= 0");
  const Index n = ds.n();
  const Index pf = ds.p() - 1;
  Matrix xc = ds.x.rightCols(pf);
  Vector colmean = xc.colwise().mean();
  xc.rowwise() -= colmean.transpose();
  const double ybar = ds.y.mean();
  Vector yc = ds.y.array() - ybar;

  SvdCache svd = svd_decompose(xc);
  Vector shrink(svd.rank), solve(svd.rank);
  for (Index i = 0; i < svd.rank; ++i) {
    const double d2 = svd.d(i) * svd.d(i);
    if (lambda == 0.0) {
      shrink(i) = 1.0;
      solve(i) = 1.0 / svd.d(i);
    } else {
      shrink(i) = d2 / (d2 + lambda);
      solve(i) = svd.d(i) / (d2 + lambda);
    }
  }
  RidgeContext ctx;
  ctx.lambda = lambda;
  ctx.hat = svd.u * shrink.asDiagonal() * svd.u.transpose();
  ctx.hat.array() += 1.0 / static_cast<double>(n);
  Vector beta_feat = svd.v * (solve.asDiagonal() * (svd.u.transpose() * yc));
  ctx.beta.resize(ds.p());
  ctx.beta(0) = ybar - colmean.dot(beta_feat);
  ctx.beta.tail(pf) = beta_feat;
  ctx.resid = ds.y - ctx.hat * ds.y;
  return ctx;
}

// Solves [I - H_idx] q = r_idx on the principal submatrix at idx; the result
// holds the exhaustive-CV prediction errors for the held-out units idx.
inline Vector submatrix_inverse_apply(const Matrix& hat, const Vector& resid,
                                      const std::vector<Index>& idx) {
  const Index n = hat.rows();
  const Index k = static_cast<Index>(idx.size());
  if (k < 1 || k >= n) throw InvalidInput("index set size must be in [1, N)");
  for (Index i = 0; i < k; ++i) {
    if (idx[i] < 0 || idx[i] >= n)
      throw InvalidInput("index out of range");
    if (i > 0 && idx[i] <= idx[i - 1])
      throw InvalidInput("index set must be strictly increasing");
  }
  Matrix a(k, k);
  Vector b(k);
  for (Index i = 0; i < k; ++i) {
    b(i) = resid(idx[i]);
    for (Index j = 0; j < k; ++j)
      a(i, j) = (i == j ? 1.0 : 0.0) - hat(idx[i], idx[j]);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(k - 1);
  // I - H has spectral norm at most 1, so an absolute floor is well scaled.
  if (!(smin > 1e-12) || smax / smin > 1e12)
    throw SingularTestBlock("I - H test block numerically singular",
                            static_cast<long>(idx[0]));
  return svd.solve(b);
}

}  // namespace xnestcv

#endif  // XNESTCV_LINALG_HPP
