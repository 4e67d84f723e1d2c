#ifndef XNESTCV_DATASET_HPP
#define XNESTCV_DATASET_HPP

#include <Eigen/Dense>

#include "xnestcv/errors.hpp"

namespace xnestcv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Response vector plus design matrix whose first column is the intercept
// (all ones). Construct from raw feature columns via from_features().
struct Dataset {
  Vector y;
  Matrix x;

  Dataset(Vector y_in, Matrix x_in) : y(std::move(y_in)), x(std::move(x_in)) {
    if (x.rows() != y.size())
      throw InvalidInput("design has " + std::to_string(x.rows()) +
                         " rows but response has " + std::to_string(y.size()));
    if (x.cols() < 1) throw InvalidInput("design needs at least one column");
    if (!y.allFinite() || !x.allFinite())
      throw InvalidInput("non-finite value in dataset");
    if ((x.col(0).array() != 1.0).any())
      throw InvalidInput("first design column must be all ones");
  }

  static Dataset from_features(const Matrix& features, Vector y_in) {
    Matrix x(features.rows(), features.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(features.cols()) = features;
    return Dataset(std::move(y_in), std::move(x));
  }

  Index n() const { return y.size(); }
  Index p() const { return x.cols(); }
};

}  // namespace xnestcv

#endif  // XNESTCV_DATASET_HPP
