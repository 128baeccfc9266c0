#pragma once

// Aggregated pairwise AUC surrogate: for every task the logistic loss of
// positive-minus-negative score differences, averaged over the task's pairs
// and summed over tasks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rrauc/data.hpp"
#include "rrauc/error.hpp"
#include "rrauc/linalg.hpp"

namespace rrauc {

/// Logistic surrogate l(u) = log(1 + exp(-u)).
inline double surrogate(double u) { return std::max(-u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

/// sigma(u) = 1 / (1 + exp(-u)), overflow-free for any finite u.
inline double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

/// l''(u) = sigma(u) sigma(-u), bounded by 1/4.
inline double surrogate_curvature(double u) { return sigmoid(u) * sigmoid(-u); }

struct LossValue {
  double total = 0.0;
  Vector per_task;
};

struct GradientPair {
  Vector d_intercept;
  DenseMatrix d_slope;
};

namespace detail {

inline void check_pairs(const DenseMatrix& h, const PairIndex& idx) {
  require_shape(static_cast<std::size_t>(h.rows()) == idx.n &&
                    static_cast<std::size_t>(h.cols()) == idx.q(),
                "score matrix is " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                    ", pair index expects " + std::to_string(idx.n) + "x" +
                    std::to_string(idx.q()));
}

/// Loss of one task, optionally accumulating d loss / d scores into grad_col.
/// Both outputs share the exp(-|u|) evaluation of every pair.
inline double task_loss(const DenseMatrix& h, Eigen::Index j, const PairIndex::Task& task,
                        double* grad_col, std::vector<double>& pos_buf,
                        std::vector<double>& neg_buf) {
  pos_buf.resize(task.positives.size());
  neg_buf.resize(task.negatives.size());
  for (std::size_t a = 0; a < task.positives.size(); ++a)
    pos_buf[a] = h(static_cast<Eigen::Index>(task.positives[a]), j);
  for (std::size_t b = 0; b < task.negatives.size(); ++b)
    neg_buf[b] = h(static_cast<Eigen::Index>(task.negatives[b]), j);

  const double w = task.normalizer();
  const Eigen::Map<const Eigen::ArrayXd> neg(neg_buf.data(), static_cast<Eigen::Index>(neg_buf.size()));
  Eigen::ArrayXd u(neg.size()), e(neg.size());
  double sum = 0.0;
  // sum_k log1p(e_k) as a log of products; each factor lies in (1, 2], so
  // blocks of 512 cannot overflow.
  auto log1p_sum = [](const Eigen::ArrayXd& ev) {
    double acc = 0.0;
    for (Eigen::Index s = 0; s < ev.size(); s += 512) {
      const Eigen::Index len = std::min<Eigen::Index>(512, ev.size() - s);
      acc += std::log((1.0 + ev.segment(s, len)).prod());
    }
    return acc;
  };
  if (grad_col == nullptr) {
    for (double hp : pos_buf) {
      u = hp - neg;
      e = (-u.abs()).exp();
      sum += (-u).max(0.0).sum() + log1p_sum(e);
    }
    return w * sum;
  }

  // neg_acc collects, per negative, the sum over positives of sigma(-(h_pos - h_neg)).
  Eigen::ArrayXd neg_acc = Eigen::ArrayXd::Zero(neg.size());
  Eigen::ArrayXd sig(neg.size());
  for (std::size_t a = 0; a < pos_buf.size(); ++a) {
    u = pos_buf[a] - neg;
    e = (-u.abs()).exp();
    sum += (-u).max(0.0).sum() + log1p_sum(e);
    sig = (u >= 0.0).select(e, 1.0) / (1.0 + e);
    neg_acc += sig;
    grad_col[task.positives[a]] = -w * sig.sum();
  }
  for (std::size_t b = 0; b < neg_buf.size(); ++b) grad_col[task.negatives[b]] = w * neg_acc(static_cast<Eigen::Index>(b));
  return w * sum;
}

}  // namespace detail

inline LossValue pairwise_loss(const DenseMatrix& h, const PairIndex& idx) {
  detail::check_pairs(h, idx);
  LossValue out{0.0, Vector::Zero(static_cast<Eigen::Index>(idx.q()))};
  std::vector<double> pos, neg;
  for (std::size_t j = 0; j < idx.q(); ++j) {
    if (!idx.tasks[j].valid) continue;
    const double v = detail::task_loss(h, static_cast<Eigen::Index>(j), idx.tasks[j], nullptr, pos, neg);
    out.per_task(static_cast<Eigen::Index>(j)) = v;
  }
  out.total = out.per_task.sum();
  return out;
}

/// d loss / d H; columns of degenerate tasks are zero.
inline DenseMatrix pairwise_score_gradient(const DenseMatrix& h, const PairIndex& idx) {
  detail::check_pairs(h, idx);
  DenseMatrix g = DenseMatrix::Zero(h.rows(), h.cols());
  std::vector<double> pos, neg;
  for (std::size_t j = 0; j < idx.q(); ++j) {
    if (!idx.tasks[j].valid) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    detail::task_loss(h, jj, idx.tasks[j], g.col(jj).data(), pos, neg);
  }
  return g;
}

/// Loss and score gradient in a single sweep over the pairs.
inline LossValue pairwise_loss_with_gradient(const DenseMatrix& h, const PairIndex& idx,
                                             DenseMatrix& grad) {
  detail::check_pairs(h, idx);
  grad.setZero(h.rows(), h.cols());
  LossValue out{0.0, Vector::Zero(static_cast<Eigen::Index>(idx.q()))};
  std::vector<double> pos, neg;
  for (std::size_t j = 0; j < idx.q(); ++j) {
    if (!idx.tasks[j].valid) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    out.per_task(jj) = detail::task_loss(h, jj, idx.tasks[j], grad.col(jj).data(), pos, neg);
  }
  out.total = out.per_task.sum();
  return out;
}

/// Column sums of the score gradient vanish, so the intercept row of
/// X0^T G is rounding noise; it is checked and then zeroed.
inline GradientPair split_pairwise_gradient(const AugmentedDesign& d, const DenseMatrix& g) {
  GradientPair out;
  const Vector raw_intercept = g.colwise().sum().transpose();
  if (raw_intercept.size() > 0 && raw_intercept.cwiseAbs().maxCoeff() > 1e-10) {
    throw NumericalError("pairwise gradient: intercept component " +
                         std::to_string(raw_intercept.cwiseAbs().maxCoeff()) +
                         " exceeds 1e-10");
  }
  out.d_intercept = Vector::Zero(g.cols());
  out.d_slope = d.slope_part().transpose() * g;
  return out;
}

inline GradientPair pairwise_coef_gradient(const CoefficientMatrix& b, const AugmentedDesign& d,
                                           const PairIndex& idx) {
  const DenseMatrix h = scores(b, d);
  return split_pairwise_gradient(d, pairwise_score_gradient(h, idx));
}

/// Raw (pre-zeroing) intercept component of the pairwise gradient.
inline Vector pairwise_raw_intercept_gradient(const CoefficientMatrix& b, const AugmentedDesign& d,
                                              const PairIndex& idx) {
  return pairwise_score_gradient(scores(b, d), idx).colwise().sum().transpose();
}

/// Fraction of positive/negative pairs with h_pos <= h_neg per task; ties
/// count as errors. Degenerate tasks yield nullopt.
inline std::vector<std::optional<double>> empirical_auc_risk(const DenseMatrix& h,
                                                             const PairIndex& idx) {
  detail::check_pairs(h, idx);
  std::vector<std::optional<double>> out(idx.q());
  for (std::size_t j = 0; j < idx.q(); ++j) {
    const auto& t = idx.tasks[j];
    if (!t.valid) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    std::vector<double> neg;
    neg.reserve(t.negatives.size());
    for (auto k : t.negatives) neg.push_back(h(static_cast<Eigen::Index>(k), jj));
    std::sort(neg.begin(), neg.end());
    double wrong = 0.0;
    for (auto i : t.positives) {
      const double hp = h(static_cast<Eigen::Index>(i), jj);
      // negatives with h_neg >= hp
      wrong += static_cast<double>(neg.end() - std::lower_bound(neg.begin(), neg.end(), hp));
    }
    out[j] = wrong * t.normalizer();
  }
  return out;
}

/// Pairwise curvature bound: the per-task Hessian is
/// M_j * l'' with M_j = sum over pairs of d d^T / (|P_j||N_j|), d = x_pos - x_neg.
/// Returns 0.25 * max_j lambda_max(M_j), a Lipschitz constant of the gradient.
inline double pairwise_lipschitz(const AugmentedDesign& d, const PairIndex& idx) {
  const DenseMatrix x = d.slope_part();
  double worst = 0.0;
  for (const auto& t : idx.tasks) {
    if (!t.valid) continue;
    const auto p = x.cols();
    DenseMatrix gp = DenseMatrix::Zero(p, p), gn = DenseMatrix::Zero(p, p);
    Vector sp = Vector::Zero(p), sn = Vector::Zero(p);
    for (auto i : t.positives) {
      const auto row = x.row(static_cast<Eigen::Index>(i)).transpose();
      gp.noalias() += row * row.transpose();
      sp += row;
    }
    for (auto k : t.negatives) {
      const auto row = x.row(static_cast<Eigen::Index>(k)).transpose();
      gn.noalias() += row * row.transpose();
      sn += row;
    }
    const double np = static_cast<double>(t.positives.size());
    const double nn = static_cast<double>(t.negatives.size());
    DenseMatrix m = nn * gp + np * gn - sp * sn.transpose() - sn * sp.transpose();
    m *= t.normalizer();
    Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(m, Eigen::EigenvaluesOnly);
    worst = std::max(worst, eig.eigenvalues().maxCoeff());
  }
  return 0.25 * worst;
}

}  // namespace rrauc
