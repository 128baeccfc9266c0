#pragma once

// Joint logistic negative log-likelihood over all tasks, scaled by 1/n.

#include <cmath>

#include "rrauc/auc_loss.hpp"
#include "rrauc/data.hpp"

namespace rrauc {

using NllValue = LossValue;

/// log(1 + exp(h)) without overflow.
inline double softplus(double h) { return std::max(h, 0.0) + std::log1p(std::exp(-std::abs(h))); }

inline NllValue logistic_nll(const DenseMatrix& h, const BinaryMatrix& y) {
  detail::require_shape(static_cast<std::size_t>(h.rows()) == y.rows() &&
                            static_cast<std::size_t>(h.cols()) == y.cols(),
                        "logistic_nll: scores and responses differ in shape");
  const double inv_n = 1.0 / static_cast<double>(h.rows());
  NllValue out{0.0, Vector::Zero(h.cols())};
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double v = h(i, j);
      // softplus(v) - y v, written so that both branches are nonnegative
      s += y(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? softplus(-v) : softplus(v);
    }
    out.per_task(j) = s * inv_n;
  }
  out.total = out.per_task.sum();
  return out;
}

/// d NLL / d H = (sigma(H) - Y) / n.
inline DenseMatrix logistic_score_gradient(const DenseMatrix& h, const BinaryMatrix& y) {
  detail::require_shape(static_cast<std::size_t>(h.rows()) == y.rows() &&
                            static_cast<std::size_t>(h.cols()) == y.cols(),
                        "logistic gradient: scores and responses differ in shape");
  const double inv_n = 1.0 / static_cast<double>(h.rows());
  DenseMatrix g(h.rows(), h.cols());
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      g(i, j) = (sigmoid(h(i, j)) - y(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) * inv_n;
  return g;
}

inline GradientPair split_logistic_gradient(const AugmentedDesign& d, const DenseMatrix& g) {
  const DenseMatrix full = d.X0.transpose() * g;
  return {full.row(0).transpose(), full.bottomRows(full.rows() - 1)};
}

inline GradientPair logistic_nll_gradient(const CoefficientMatrix& b, const AugmentedDesign& d,
                                          const BinaryMatrix& y) {
  return split_logistic_gradient(d, logistic_score_gradient(scores(b, d), y));
}

/// Lipschitz constant of the 1/n-scaled NLL gradient: ||X0||_op^2 / (4n).
inline double logistic_lipschitz(const AugmentedDesign& d) {
  const double s = operator_norm(d.X0);
  return s * s / (4.0 * static_cast<double>(d.n()));
}

}  // namespace rrauc
