#pragma once

// Dense matrix primitives used by the optimizer: thin SVD, best rank-r
// projection and spectral norm estimation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "rrauc/error.hpp"

namespace rrauc {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const DenseMatrix& a) { return a.allFinite(); }

inline void require_finite(const DenseMatrix& a, const char* what) {
  if (!a.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

/// Thin SVD: a = left * diag(singular) * right^T with k = min(rows, cols).
struct SvdFactors {
  DenseMatrix left;
  Vector singular;
  DenseMatrix right;

  DenseMatrix reconstruct() const {
    return left * singular.asDiagonal() * right.transpose();
  }
};

/// Thin SVD with singular values sorted nonincreasing. The first nonzero
/// entry of every left singular vector is made positive.
inline SvdFactors svd(const DenseMatrix& a) {
  require_finite(a, "svd");
  if (a.size() == 0) throw DataError("svd: empty matrix");

  Eigen::JacobiSVD<DenseMatrix> solver(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!out.left.allFinite() || !out.right.allFinite() || !out.singular.allFinite()) {
    throw NumericalError("svd: decomposition did not converge");
  }

  for (Eigen::Index k = 0; k < out.left.cols(); ++k) {
    for (Eigen::Index i = 0; i < out.left.rows(); ++i) {
      const double v = out.left(i, k);
      if (std::abs(v) > 1e-14) {
        if (v < 0) {
          out.left.col(k) *= -1.0;
          out.right.col(k) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

/// Best rank-r approximation in Frobenius norm (truncated SVD).
inline DenseMatrix project_rank(const DenseMatrix& a, std::size_t r) {
  if (r == 0) throw ConfigError("project_rank: rank must be >= 1");
  const auto k = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  if (r >= k) {
    require_finite(a, "project_rank");
    return a;
  }
  const SvdFactors f = svd(a);
  const auto rr = static_cast<Eigen::Index>(r);
  return f.left.leftCols(rr) * f.singular.head(rr).asDiagonal() *
         f.right.leftCols(rr).transpose();
}

/// Number of singular values above rel_tol * sigma_1.
inline std::size_t numerical_rank(const DenseMatrix& a, double rel_tol = 1e-10) {
  if (a.size() == 0) return 0;
  const Vector s = svd(a).singular;
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

/// Largest singular value by power iteration on a^T a, started from the
/// normalized all-ones vector. Stops once the extrapolated remaining error
/// of the estimate is below tol (relative).
inline double operator_norm(const DenseMatrix& a, double tol = 1e-6) {
  require_finite(a, "operator_norm");
  if (tol <= 0) throw ConfigError("operator_norm: tol must be positive");
  const Eigen::Index n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;

  constexpr int kMaxIter = 20000;
  // Deterministic restarts: all-ones first, then coordinate vectors.
  for (Eigen::Index attempt = 0; attempt <= n; ++attempt) {
    Vector v = Vector::Ones(n);
    if (attempt > 0) v = Vector::Unit(n, attempt - 1);
    v.normalize();
    double sigma = (a * v).norm();
    double prev_diff = -1.0;
    bool degenerate = false;
    for (int it = 0; it < kMaxIter; ++it) {
      Vector w = a.transpose() * (a * v);
      const double wn = w.norm();
      if (wn == 0.0) {
        degenerate = true;
        break;
      }
      v = w / wn;
      const double next = (a * v).norm();
      const double diff = std::abs(next - sigma);
      sigma = next;
      if (diff == 0.0) break;
      double remaining = diff;
      if (prev_diff > 0.0) {
        const double ratio = diff / prev_diff;
        if (ratio < 1.0) remaining = diff * ratio / (1.0 - ratio);
        else remaining = diff * 1e6;
      }
      if (remaining <= tol * sigma && prev_diff > 0.0) break;
      prev_diff = diff;
    }
    if (!degenerate) return sigma;
  }
  return 0.0;
}

}  // namespace rrauc
