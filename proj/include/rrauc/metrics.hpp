#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "rrauc/data.hpp"
#include "rrauc/error.hpp"

namespace rrauc {

/// Mann-Whitney pair counts: numerator = #{s_pos > s_neg} + 0.5 #{ties}.
struct AucCounts {
  double numerator = 0.0;
  double pairs = 0.0;
  double value() const { return numerator / pairs; }
};

/// Midrank pair counts, or nullopt when one class is empty.
inline std::optional<AucCounts> auc_counts(std::span<const double> s, std::span<const std::uint8_t> y) {
  if (s.size() != y.size()) throw DataError("auc: scores and labels differ in length");
  const std::size_t n = s.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  double rank_sum = 0.0, positives = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && s[order[j + 1]] == s[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (y[order[k]]) {
        rank_sum += midrank;
        positives += 1.0;
      }
    }
    i = j + 1;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  return AucCounts{rank_sum - positives * (positives + 1.0) / 2.0, positives * negatives};
}

inline std::optional<double> auc(std::span<const double> s, std::span<const std::uint8_t> y) {
  const auto c = auc_counts(s, y);
  if (!c) return std::nullopt;
  return c->value();
}

/// Per-task AUC of score columns against a binary matrix.
inline std::vector<std::optional<double>> task_aucs(const DenseMatrix& h, const BinaryMatrix& y) {
  detail::require_shape(static_cast<std::size_t>(h.rows()) == y.rows() &&
                            static_cast<std::size_t>(h.cols()) == y.cols(),
                        "task_aucs: scores and labels differ in shape");
  std::vector<std::optional<double>> out(y.cols());
  std::vector<double> s(y.rows());
  std::vector<std::uint8_t> lab(y.rows());
  for (std::size_t j = 0; j < y.cols(); ++j) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      s[i] = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      lab[i] = y(i, j);
    }
    out[j] = auc(s, lab);
  }
  return out;
}

/// ||slope - C||_F^2 / (p q); intercepts are not part of the comparison.
inline double estimation_error(const CoefficientMatrix& b, const DenseMatrix& truth) {
  detail::require_shape(b.slope.rows() == truth.rows() && b.slope.cols() == truth.cols(),
                        "estimation_error: slope and truth differ in shape");
  return (b.slope - truth).squaredNorm() / static_cast<double>(truth.size());
}

/// Fraction of entries with 1(score > 0) equal to the label.
inline double prediction_accuracy(const CoefficientMatrix& b, const Dataset& test) {
  const DenseMatrix h = scores(b, augment(test));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.n(); ++i)
    for (std::size_t j = 0; j < test.q(); ++j) {
      const int pred = h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0 ? 1 : 0;
      hits += pred == test.Y(i, j) ? 1 : 0;
    }
  return static_cast<double>(hits) / static_cast<double>(test.n() * test.q());
}

struct EvalReport {
  double mean_auc = 0.0;
  std::optional<double> est_error;
  double accuracy = 0.0;
  std::size_t valid_task_count = 0;
};

/// Test-set evaluation; the estimation error is only reported when the truth is known.
inline EvalReport evaluate(const CoefficientMatrix& b, const Dataset& test,
                           const DenseMatrix* truth = nullptr) {
  EvalReport r;
  const auto aucs = task_aucs(scores(b, augment(test)), test.Y);
  double sum = 0.0;
  for (const auto& a : aucs) {
    if (!a) continue;
    sum += *a;
    ++r.valid_task_count;
  }
  r.mean_auc = r.valid_task_count ? sum / static_cast<double>(r.valid_task_count) : 0.5;
  if (truth) r.est_error = estimation_error(b, *truth);
  r.accuracy = prediction_accuracy(b, test);
  return r;
}

}  // namespace rrauc
