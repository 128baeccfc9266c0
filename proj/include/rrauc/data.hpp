#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rrauc/error.hpp"
#include "rrauc/linalg.hpp"

namespace rrauc {

/// n x q matrix of {0,1} responses, one byte per entry.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void set(std::size_t i, std::size_t j, int value) {
    if (value != 0 && value != 1) throw DataError("binary matrix entries must be 0 or 1");
    data_[i * cols_ + j] = static_cast<std::uint8_t>(value);
  }

  void flip(std::size_t i, std::size_t j) { data_[i * cols_ + j] ^= 1U; }

  /// Indicator as doubles; convenient for linear algebra.
  DenseMatrix as_dense() const {
    DenseMatrix out(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
    return out;
  }

  BinaryMatrix select_rows(const std::vector<std::size_t>& rows) const {
    BinaryMatrix out(rows.size(), cols_);
    for (std::size_t k = 0; k < rows.size(); ++k)
      for (std::size_t j = 0; j < cols_; ++j) out.data_[k * cols_ + j] = (*this)(rows[k], j);
    return out;
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

struct Dataset {
  DenseMatrix X;
  BinaryMatrix Y;
  std::vector<std::string> feature_names;
  std::vector<std::string> task_names;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }
  std::size_t q() const { return Y.cols(); }

  void validate() const {
    detail::require_shape(static_cast<std::size_t>(X.rows()) == Y.rows(),
                          "X and Y must have the same number of rows");
    require_finite(X, "dataset predictors");
  }

  Dataset select_rows(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
      out.X.row(static_cast<Eigen::Index>(k)) = X.row(static_cast<Eigen::Index>(rows[k]));
    out.Y = Y.select_rows(rows);
    out.feature_names = feature_names;
    out.task_names = task_names;
    return out;
  }
};

/// X0 = [1_n, X].
struct AugmentedDesign {
  DenseMatrix X0;

  std::size_t n() const { return static_cast<std::size_t>(X0.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X0.cols()) - 1; }
  auto slope_part() const { return X0.rightCols(X0.cols() - 1); }
};

inline AugmentedDesign augment(const DenseMatrix& X) {
  if (X.rows() < 1) throw DataError("augment: need at least one observation");
  AugmentedDesign d;
  d.X0.resize(X.rows(), X.cols() + 1);
  d.X0.col(0).setOnes();
  d.X0.rightCols(X.cols()) = X;
  return d;
}

inline AugmentedDesign augment(const Dataset& d) { return augment(d.X); }

/// Intercept row plus p x q slope block with a rank budget on the slope.
struct CoefficientMatrix {
  Vector intercept;
  DenseMatrix slope;
  std::size_t rank_budget = 1;

  static CoefficientMatrix zeros(std::size_t p, std::size_t q, std::size_t rank) {
    return {Vector::Zero(static_cast<Eigen::Index>(q)),
            DenseMatrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)), rank};
  }

  std::size_t p() const { return static_cast<std::size_t>(slope.rows()); }
  std::size_t q() const { return static_cast<std::size_t>(slope.cols()); }

  /// Stacked (p+1) x q matrix [intercept^T; slope].
  DenseMatrix stacked() const {
    DenseMatrix b(slope.rows() + 1, slope.cols());
    b.row(0) = intercept.transpose();
    b.bottomRows(slope.rows()) = slope;
    return b;
  }

  static CoefficientMatrix from_stacked(const DenseMatrix& b, std::size_t rank) {
    return {b.row(0).transpose(), b.bottomRows(b.rows() - 1), rank};
  }
};

/// Positive / negative row sets of every task.
struct PairIndex {
  struct Task {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    bool valid = false;
    double normalizer() const {
      return 1.0 / (static_cast<double>(positives.size()) * static_cast<double>(negatives.size()));
    }
  };

  std::size_t n = 0;
  std::vector<Task> tasks;

  std::size_t q() const { return tasks.size(); }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (const auto& t : tasks) c += t.valid ? 1 : 0;
    return c;
  }
};

inline PairIndex build_pair_index(const BinaryMatrix& Y) {
  PairIndex idx;
  idx.n = Y.rows();
  idx.tasks.resize(Y.cols());
  for (std::size_t j = 0; j < Y.cols(); ++j) {
    auto& t = idx.tasks[j];
    for (std::size_t i = 0; i < Y.rows(); ++i) {
      (Y(i, j) == 1 ? t.positives : t.negatives).push_back(i);
    }
    t.valid = !t.positives.empty() && !t.negatives.empty();
  }
  return idx;
}

/// H = X0 B, i.e. H_ij = intercept_j + X_i . slope_j.
inline DenseMatrix scores(const CoefficientMatrix& b, const AugmentedDesign& d) {
  detail::require_shape(static_cast<std::size_t>(d.X0.cols()) == b.p() + 1 &&
                            static_cast<std::size_t>(b.intercept.size()) == b.q(),
                        "scores: design has " + std::to_string(d.X0.cols() - 1) +
                            " predictors, coefficients have " + std::to_string(b.p()));
  DenseMatrix h = d.slope_part() * b.slope;
  h.rowwise() += b.intercept.transpose();
  return h;
}

}  // namespace rrauc
