#pragma once

// Projected gradient descent for rank-constrained multi-task objectives:
// full gradient step on the stacked coefficients, then rank-r truncation of
// the slope block. Intercepts are never projected.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rrauc/auc_loss.hpp"
#include "rrauc/data.hpp"
#include "rrauc/error.hpp"
#include "rrauc/likelihood.hpp"
#include "rrauc/linalg.hpp"

namespace rrauc {

enum class Objective { auc_surrogate, logistic_nll };

inline const char* to_string(Objective o) {
  return o == Objective::auc_surrogate ? "auc" : "nll";
}

inline Objective parse_objective(const std::string& s) {
  if (s == "auc" || s == "auc_surrogate" || s == "rrr_auc") return Objective::auc_surrogate;
  if (s == "nll" || s == "logistic_nll" || s == "rrr_likelihood") return Objective::logistic_nll;
  throw ConfigError("unknown objective '" + s + "' (expected auc or nll)");
}

struct StepRule {
  enum class Kind { fixed, lipschitz, backtracking };
  Kind kind = Kind::lipschitz;
  /// fixed: the step itself; lipschitz: c; backtracking: initial c0.
  double value = 4.0;
  /// backtracking shrink factor beta in (0, 1).
  double shrink = 0.5;

  static StepRule fixed(double eta) { return {Kind::fixed, eta, 0.5}; }
  static StepRule lipschitz(double c) { return {Kind::lipschitz, c, 0.5}; }
  static StepRule backtracking(double beta, double c0) { return {Kind::backtracking, c0, beta}; }

  void validate() const {
    if (!(value > 0) || !std::isfinite(value)) throw ConfigError("step parameter must be positive");
    if (kind == Kind::lipschitz && value > 4.0)
      throw ConfigError("lipschitz step constant c must satisfy 0 < c <= 4");
    if (kind == Kind::backtracking && !(shrink > 0.0 && shrink < 1.0))
      throw ConfigError("backtracking shrink factor must lie in (0, 1)");
  }
};

/// Parses "fixed:<eta>", "lipschitz:<c>" or "backtracking:<beta>:<c0>".
inline StepRule parse_step_rule(const std::string& s) {
  auto fail = [&]() -> StepRule { throw ConfigError("malformed step rule '" + s + "'"); };
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  try {
    if (kind == "fixed") {
      if (rest.empty()) return fail();
      return StepRule::fixed(std::stod(rest));
    }
    if (kind == "lipschitz") return StepRule::lipschitz(rest.empty() ? 4.0 : std::stod(rest));
    if (kind == "backtracking") {
      if (rest.empty()) return StepRule::backtracking(0.5, 4.0);
      const auto c2 = rest.find(':');
      if (c2 == std::string::npos) return StepRule::backtracking(std::stod(rest), 4.0);
      return StepRule::backtracking(std::stod(rest.substr(0, c2)), std::stod(rest.substr(c2 + 1)));
    }
  } catch (const std::logic_error&) {
    return fail();
  }
  return fail();
}

inline std::string to_string(const StepRule& r) {
  switch (r.kind) {
    case StepRule::Kind::fixed: return "fixed:" + std::to_string(r.value);
    case StepRule::Kind::lipschitz: return "lipschitz:" + std::to_string(r.value);
    case StepRule::Kind::backtracking:
      return "backtracking:" + std::to_string(r.shrink) + ":" + std::to_string(r.value);
  }
  return "?";
}

enum class InterceptMode { zero, calibrate };

struct FitConfig {
  Objective objective = Objective::auc_surrogate;
  std::size_t rank = 1;
  /// Empty selects the objective's default rule.
  std::optional<StepRule> step;
  double stop_tol = 1e-8;
  std::size_t max_iter = 5000;
  InterceptMode intercept_mode = InterceptMode::calibrate;
  /// Empty means start from zeros.
  std::optional<CoefficientMatrix> warm_start;
  std::uint64_t seed = 0;

  StepRule effective_step() const {
    if (step) return *step;
    return objective == Objective::logistic_nll ? StepRule::lipschitz(4.0)
                                                : StepRule::backtracking(0.5, 4.0);
  }

  void validate() const {
    if (rank < 1) throw ConfigError("rank must be >= 1");
    if (!(stop_tol > 0)) throw ConfigError("stop tolerance must be positive");
    effective_step().validate();
  }
};

struct IterationRecord {
  std::size_t iter = 0;
  double loss = 0.0;
  /// Loss right after the gradient step, before projection (backtracking only).
  std::optional<double> pre_projection_loss;
  double step = 0.0;
  std::size_t halvings = 0;
  double relative_change = 0.0;
  std::size_t slope_rank = 0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

enum class FitStatus { converged, max_iter };

struct FitTrace {
  double initial_loss = 0.0;
  std::vector<IterationRecord> records;
  FitStatus status = FitStatus::max_iter;
  /// Iterations whose projection increased the loss above the pre-projection value
  /// of the previous iterate.
  std::size_t projection_increases = 0;

  double final_loss() const { return records.empty() ? initial_loss : records.back().loss; }
};

struct FitResult {
  CoefficientMatrix coef;
  FitTrace trace;
};

/// Objective bound to a training set, evaluated on stacked (p+1) x q coefficients.
class Problem {
 public:
  Problem(const Dataset& train, Objective objective)
      : objective_(objective), design_(augment(train)), y_(train.Y), idx_(build_pair_index(train.Y)) {
    train.validate();
    if (objective_ == Objective::auc_surrogate && idx_.valid_count() == 0)
      throw DataError("every task has a single class; pairwise objective undefined");
  }

  Objective objective() const { return objective_; }
  const AugmentedDesign& design() const { return design_; }
  const PairIndex& pairs() const { return idx_; }
  const BinaryMatrix& responses() const { return y_; }

  double value(const DenseMatrix& b) const {
    const DenseMatrix h = design_.X0 * b;
    return objective_ == Objective::auc_surrogate ? pairwise_loss(h, idx_).total
                                                  : logistic_nll(h, y_).total;
  }

  /// Returns the loss and writes the stacked gradient.
  double value_and_gradient(const DenseMatrix& b, DenseMatrix& grad) const {
    const DenseMatrix h = design_.X0 * b;
    if (objective_ == Objective::auc_surrogate) {
      DenseMatrix g;
      const double v = pairwise_loss_with_gradient(h, idx_, g).total;
      const GradientPair split = split_pairwise_gradient(design_, g);
      grad.resize(b.rows(), b.cols());
      grad.row(0) = split.d_intercept.transpose();
      grad.bottomRows(b.rows() - 1) = split.d_slope;
      return v;
    }
    const DenseMatrix g = logistic_score_gradient(h, y_);
    grad.noalias() = design_.X0.transpose() * g;
    return logistic_nll(h, y_).total;
  }

  /// Lipschitz constant of the gradient with respect to the stacked coefficients.
  double lipschitz() const {
    if (!lipschitz_) {
      lipschitz_ = objective_ == Objective::auc_surrogate ? pairwise_lipschitz(design_, idx_)
                                                          : logistic_lipschitz(design_);
    }
    return *lipschitz_;
  }

 private:
  Objective objective_;
  AugmentedDesign design_;
  BinaryMatrix y_;
  PairIndex idx_;
  mutable std::optional<double> lipschitz_;
};

/// Design-based step: fixed -> eta, lipschitz(c) -> c / ||X0||_op^2,
/// backtracking -> the starting trial c0 / ||X0||_op^2.
inline double step_size(const AugmentedDesign& d, const StepRule& rule) {
  rule.validate();
  if (rule.kind == StepRule::Kind::fixed) return rule.value;
  const double s = operator_norm(d.X0);
  if (s == 0.0) throw DataError("step_size: zero design matrix");
  return rule.value / (s * s);
}

/// Step for a bound problem. Lipschitz and backtracking rules use c / (4L) with L
/// the objective's gradient Lipschitz constant; for an unnormalized per-entry
/// logistic loss L = ||X0||^2/4 and this reduces to step_size().
inline double initial_step(const Problem& problem, const StepRule& rule) {
  rule.validate();
  if (rule.kind == StepRule::Kind::fixed) return rule.value;
  const double l = problem.lipschitz();
  if (!(l > 0)) throw DataError("step size: objective has zero curvature (zero design?)");
  return rule.value / (4.0 * l);
}

struct BacktrackResult {
  double step = 0.0;
  double loss = 0.0;
  std::size_t halvings = 0;
  bool descent = false;
};

inline constexpr std::size_t kMaxHalvings = 60;

/// Shrinks eta by beta until f(b - eta g) <= f(b). When no descent step exists
/// within kMaxHalvings the step is reported as 0.
inline BacktrackResult backtrack(const Problem& problem, const DenseMatrix& b, const DenseMatrix& g,
                                 double current_loss, double eta0, double beta) {
  BacktrackResult r;
  double eta = eta0;
  for (std::size_t h = 0; h <= kMaxHalvings; ++h) {
    const double trial = problem.value(b - eta * g);
    if (std::isfinite(trial) && trial <= current_loss) {
      return {eta, trial, h, true};
    }
    eta *= beta;
  }
  r.step = 0.0;
  r.loss = current_loss;
  r.halvings = kMaxHalvings;
  return r;
}

/// Per-task intercept minimizing the logistic NLL with the slope frozen.
/// Safeguarded Newton on the derivative, bisection fallback inside a bracket.
inline Vector calibrate_intercepts(const DenseMatrix& slope, const Dataset& d) {
  detail::require_shape(slope.rows() == d.X.cols() && static_cast<std::size_t>(slope.cols()) == d.q(),
                        "calibrate_intercepts: slope is " + std::to_string(slope.rows()) + "x" +
                            std::to_string(slope.cols()));
  const DenseMatrix s = d.X * slope;
  const Eigen::Index n = s.rows();
  Vector out = Vector::Zero(slope.cols());

  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    double positives = 0;
    for (Eigen::Index i = 0; i < n; ++i) positives += d.Y(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    if (positives == 0 || positives == static_cast<double>(n)) continue;

    // mean derivative of the NLL in b and its second derivative
    auto deriv = [&](double b, double* curv) {
      double g = 0.0, c = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = sigmoid(b + s(i, j));
        g += p - d.Y(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        c += p * (1.0 - p);
      }
      if (curv) *curv = c / static_cast<double>(n);
      return g / static_cast<double>(n);
    };

    double lo = -1.0, hi = 1.0;
    while (deriv(lo, nullptr) > 0 && lo > -1e6) lo *= 2.0;
    while (deriv(hi, nullptr) < 0 && hi < 1e6) hi *= 2.0;

    double b = 0.0;
    for (int it = 0; it < 50; ++it) {
      double curv = 0.0;
      const double g = deriv(b, &curv);
      if (std::abs(g) <= 1e-10) break;
      if (g > 0) hi = b; else lo = b;
      double next = curv > 0 ? b - g / curv : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      b = next;
    }
    out(j) = b;
  }
  return out;
}

namespace detail {

inline void project_slope(DenseMatrix& b, std::size_t rank, std::size_t& numerical_rank_out) {
  const DenseMatrix slope = b.bottomRows(b.rows() - 1);
  const auto k = static_cast<std::size_t>(std::min(slope.rows(), slope.cols()));
  const SvdFactors f = svd(slope);
  const double top = f.singular.size() ? f.singular(0) : 0.0;
  std::size_t kept = std::min(rank, k);
  std::size_t nr = 0;
  for (std::size_t i = 0; i < kept; ++i)
    if (f.singular(static_cast<Eigen::Index>(i)) > 1e-10 * top) ++nr;
  numerical_rank_out = nr;
  if (rank >= k) return;
  const auto rr = static_cast<Eigen::Index>(rank);
  b.bottomRows(b.rows() - 1) = f.left.leftCols(rr) * f.singular.head(rr).asDiagonal() *
                               f.right.leftCols(rr).transpose();
}

}  // namespace detail

/// Called after every iteration with the iteration number and the stacked
/// post-projection iterate.
using IterateObserver = std::function<void(std::size_t, const DenseMatrix&)>;

inline FitResult fit(const Dataset& train, const FitConfig& cfg, const IterateObserver& observer = {}) {
  cfg.validate();
  const Problem problem(train, cfg.objective);
  const std::size_t p = train.p(), q = train.q();

  DenseMatrix b;
  if (cfg.warm_start) {
    detail::require_shape(cfg.warm_start->p() == p && cfg.warm_start->q() == q,
                          "warm start coefficients do not match the data");
    b = cfg.warm_start->stacked();
  } else {
    b = DenseMatrix::Zero(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(q));
  }
  const bool freeze_intercept = cfg.intercept_mode == InterceptMode::zero;
  if (freeze_intercept) b.row(0).setZero();

  FitResult result;
  DenseMatrix grad;
  double loss = problem.value_and_gradient(b, grad);
  if (!std::isfinite(loss)) throw NumericalError("initial loss is not finite");
  result.trace.initial_loss = loss;
  result.trace.status = FitStatus::max_iter;

  const StepRule rule = cfg.effective_step();
  const double eta0 = initial_step(problem, rule);

  for (std::size_t t = 0; t < cfg.max_iter; ++t) {
    IterationRecord rec;
    rec.iter = t + 1;
    if (freeze_intercept) grad.row(0).setZero();

    double eta = eta0;
    if (rule.kind == StepRule::Kind::backtracking) {
      const BacktrackResult bt = backtrack(problem, b, grad, loss, eta0, rule.shrink);
      eta = bt.step;
      rec.halvings = bt.halvings;
      rec.pre_projection_loss = bt.loss;
    }
    rec.step = eta;

    DenseMatrix next = b - eta * grad;
    detail::project_slope(next, cfg.rank, rec.slope_rank);

    const double denom = std::max(b.squaredNorm(), 1e-12);
    rec.relative_change = (next - b).squaredNorm() / denom;

    const double next_loss = problem.value_and_gradient(next, grad);
    if (!std::isfinite(next_loss) || !next.allFinite())
      throw NumericalError("non-finite loss at iteration " + std::to_string(t + 1) +
                           "; reduce the step size or use backtracking");
    if (rec.pre_projection_loss && next_loss > *rec.pre_projection_loss)
      ++result.trace.projection_increases;
    rec.loss = next_loss;
    b = std::move(next);
    loss = next_loss;
    result.trace.records.push_back(rec);
    if (observer) observer(rec.iter, b);
    if (rec.relative_change < cfg.stop_tol) {
      result.trace.status = FitStatus::converged;
      break;
    }
  }

  result.coef = CoefficientMatrix::from_stacked(b, cfg.rank);
  if (cfg.intercept_mode == InterceptMode::calibrate) {
    result.coef.intercept = calibrate_intercepts(result.coef.slope, train);
  } else {
    result.coef.intercept.setZero();
  }
  return result;
}

}  // namespace rrauc
