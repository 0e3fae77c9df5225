#pragma once

#include <Eigen/Dense>

#include "amerasian/error.hpp"

namespace amerasian {

struct RidgeResult {
  Eigen::VectorXd coef;
  double lambda = 0.0;
  bool rank_deficient = false;  // only detected on the lambda = 0 path
};

// Solves min |X b - y|^2 + lambda |b|^2 with lambda = scale * mean(diag(X^T X)).
// lambda > 0 runs Householder QR on the stacked system [X; sqrt(lambda) I],
// lambda = 0 the complete orthogonal decomposition (minimum-norm solution).
inline RidgeResult ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double scale = 1e-8) {
  if (x.rows() != y.size()) throw ShapeError("design and target row counts differ");
  if (scale < 0.0) throw ParameterError("ridge scale must be non-negative");
  const Eigen::Index n = x.rows(), b = x.cols();
  RidgeResult out;
  if (b == 0) {
    out.coef.resize(0);
    return out;
  }
  const double mean_diag = x.squaredNorm() / static_cast<double>(b);
  out.lambda = scale * mean_diag;
  if (out.lambda > 0.0) {
    Eigen::MatrixXd aug(n + b, b);
    aug.topRows(n) = x;
    aug.bottomRows(b) = std::sqrt(out.lambda) * Eigen::MatrixXd::Identity(b, b);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + b);
    rhs.head(n) = y;
    out.coef = aug.householderQr().solve(rhs);
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  out.coef = cod.solve(y);
  out.rank_deficient = cod.rank() < b;
  return out;
}

}  // namespace amerasian
