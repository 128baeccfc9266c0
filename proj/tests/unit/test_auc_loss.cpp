#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace rrauc;
using testing_support::column;
using testing_support::random_labels;

namespace {

BinaryMatrix single_pair() {
  BinaryMatrix y(2, 1);
  y.set(0, 0, 1);
  return y;
}

double loss_of_stacked(const DenseMatrix& b, const AugmentedDesign& d, const PairIndex& idx) {
  return pairwise_loss(d.X0 * b, idx).total;
}

}  // namespace

TEST(Surrogate, StableFormMatchesDefinition) {
  for (double u : {-30.0, -3.0, -0.5, 0.0, 0.25, 2.0, 30.0})
    EXPECT_NEAR(surrogate(u), std::log1p(std::exp(-u)), 1e-15 * std::max(1.0, std::abs(u)));
  EXPECT_DOUBLE_EQ(surrogate(-800.0), 800.0);
  EXPECT_EQ(surrogate(800.0), 0.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-800.0)));
  EXPECT_EQ(sigmoid(-800.0) + sigmoid(800.0), 1.0);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
}

TEST(Surrogate, CurvatureBoundedByQuarter) {
  for (double u = -60.0; u <= 60.0; u += 0.01) {
    const double c = surrogate_curvature(u);
    EXPECT_LE(c, 0.25);
    EXPECT_GE(c, 0.0);
  }
  EXPECT_DOUBLE_EQ(surrogate_curvature(0.0), 0.25);
}

TEST(PairwiseLoss, ZeroScoresGiveLogTwoPerTask) {
  std::mt19937_64 gen(1);
  BinaryMatrix y = random_labels(gen, 12, 5);
  for (std::size_t j = 0; j < 5; ++j) {
    y.set(0, j, 1);
    y.set(1, j, 0);
  }
  const LossValue v = pairwise_loss(DenseMatrix::Zero(12, 5), build_pair_index(y));
  EXPECT_NEAR(v.total, 5 * std::log(2.0), 1e-13);
}

TEST(PairwiseLoss, SinglePairValue) {
  DenseMatrix h(2, 1);
  h << 2, -1;
  const LossValue v = pairwise_loss(h, build_pair_index(single_pair()));
  EXPECT_NEAR(v.per_task(0), std::log1p(std::exp(-3.0)), 1e-15);
  EXPECT_NEAR(v.per_task(0), 0.048587, 1e-6);
}

TEST(PairwiseLoss, AllTasksInvalidGivesZero) {
  BinaryMatrix y(4, 3);
  for (std::size_t i = 0; i < 4; ++i) y.set(i, 1, 1);
  const LossValue v = pairwise_loss(DenseMatrix::Ones(4, 3), build_pair_index(y));
  EXPECT_EQ(v.total, 0.0);
  EXPECT_EQ(v.per_task, Vector::Zero(3));
  EXPECT_EQ(pairwise_score_gradient(DenseMatrix::Ones(4, 3), build_pair_index(y)), DenseMatrix::Zero(4, 3));
}

TEST(PairwiseLoss, MatchesBruteForceEnumeration) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix h = oracle::random_matrix(gen, 40, 3, 3.0);
    const BinaryMatrix y = random_labels(gen, 40, 3, 0.3);
    const LossValue v = pairwise_loss(h, build_pair_index(y));
    for (std::size_t j = 0; j < 3; ++j) {
      const auto ref = static_cast<double>(oracle::brute_pairwise_task(column(h, j), column(y, j)));
      EXPECT_NEAR(v.per_task(Eigen::Index(j)), ref, 1e-13);
    }
    EXPECT_NEAR(v.total, v.per_task.sum(), 1e-12);
    EXPECT_GE(v.total, 0.0);
  }
}

TEST(PairwiseLoss, ShapeMismatchIsRejected) {
  const PairIndex idx = build_pair_index(single_pair());
  EXPECT_THROW(pairwise_loss(DenseMatrix::Zero(3, 1), idx), DataError);
  EXPECT_THROW(pairwise_score_gradient(DenseMatrix::Zero(2, 2), idx), DataError);
}

TEST(PairwiseScoreGradient, SinglePairAtZero) {
  const DenseMatrix g = pairwise_score_gradient(DenseMatrix::Zero(2, 1), build_pair_index(single_pair()));
  EXPECT_DOUBLE_EQ(g(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(g(1, 0), 0.5);
}

TEST(PairwiseScoreGradient, ColumnsSumToZero) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix h = oracle::random_matrix(gen, 50, 6, 4.0);
    const DenseMatrix g = pairwise_score_gradient(h, build_pair_index(random_labels(gen, 50, 6, 0.4)));
    EXPECT_LE(g.colwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PairwiseScoreGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix h = oracle::random_matrix(gen, 25, 3, 2.0);
    const PairIndex idx = build_pair_index(random_labels(gen, 25, 3));
    const DenseMatrix fd = oracle::fd_gradient([&](const DenseMatrix& m) { return pairwise_loss(m, idx).total; }, h);
    EXPECT_LE(oracle::relative_error(pairwise_score_gradient(h, idx), fd), 1e-5);
  }
}

TEST(PairwiseScoreGradient, FusedSweepAgreesWithSeparateCalls) {
  std::mt19937_64 gen(5);
  const DenseMatrix h = oracle::random_matrix(gen, 30, 4);
  const PairIndex idx = build_pair_index(random_labels(gen, 30, 4));
  DenseMatrix g;
  const LossValue v = pairwise_loss_with_gradient(h, idx, g);
  EXPECT_EQ(v.total, pairwise_loss(h, idx).total);
  EXPECT_EQ(g, pairwise_score_gradient(h, idx));
}

TEST(PairwiseCoefGradient, ZeroSlopeClosedForm) {
  std::mt19937_64 gen(6);
  const DenseMatrix x = oracle::random_matrix(gen, 20, 4);
  const BinaryMatrix y = random_labels(gen, 20, 3);
  const PairIndex idx = build_pair_index(y);
  CoefficientMatrix b = CoefficientMatrix::zeros(4, 3, 2);
  b.intercept << 1.0, -2.0, 0.3;
  const GradientPair gp = pairwise_coef_gradient(b, augment(x), idx);
  DenseMatrix g(20, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    const double np = static_cast<double>(idx.tasks[j].positives.size());
    const double nn = static_cast<double>(idx.tasks[j].negatives.size());
    for (std::size_t i = 0; i < 20; ++i) g(Eigen::Index(i), Eigen::Index(j)) = y(i, j) ? -0.5 / np : 0.5 / nn;
  }
  EXPECT_LE((gp.d_slope - x.transpose() * g).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(gp.d_intercept, Vector::Zero(3));
}

TEST(PairwiseCoefGradient, MatchesFiniteDifferencesInSlope) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const AugmentedDesign d = augment(oracle::random_matrix(gen, 30, 5));
    const PairIndex idx = build_pair_index(random_labels(gen, 30, 3));
    const CoefficientMatrix b = CoefficientMatrix::from_stacked(oracle::random_matrix(gen, 6, 3, 0.7), 2);
    auto f = [&](const DenseMatrix& slope) {
      CoefficientMatrix c = b;
      c.slope = slope;
      return pairwise_loss(scores(c, d), idx).total;
    };
    const DenseMatrix fd = oracle::fd_gradient(f, b.slope);
    EXPECT_LE(oracle::relative_error(pairwise_coef_gradient(b, d, idx).d_slope, fd), 1e-5);
  }
}

TEST(PairwiseCoefGradient, InterceptShiftInvariance) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    const AugmentedDesign d = augment(oracle::random_matrix(gen, 40, 6));
    const PairIndex idx = build_pair_index(random_labels(gen, 40, 4));
    CoefficientMatrix b = CoefficientMatrix::from_stacked(oracle::random_matrix(gen, 7, 4), 2);
    const double loss0 = pairwise_loss(scores(b, d), idx).total;
    const DenseMatrix slope_grad0 = pairwise_coef_gradient(b, d, idx).d_slope;
    b.intercept = oracle::random_matrix(gen, 4, 1, 5.0);
    EXPECT_LE(std::abs(pairwise_loss(scores(b, d), idx).total - loss0), 1e-12);
    EXPECT_LE((pairwise_coef_gradient(b, d, idx).d_slope - slope_grad0).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(pairwise_raw_intercept_gradient(b, d, idx).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PairwiseCoefGradient, NonzeroInterceptComponentIsANumericalError) {
  const AugmentedDesign d = augment(DenseMatrix::Ones(2, 1));
  DenseMatrix g(2, 1);
  g << 0.5, 0.5;
  EXPECT_THROW(split_pairwise_gradient(d, g), NumericalError);
}

TEST(PairwiseLoss, ConvexAlongLines) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const AugmentedDesign d = augment(oracle::random_matrix(gen, 30, 4));
    const PairIndex idx = build_pair_index(random_labels(gen, 30, 3));
    const DenseMatrix b1 = oracle::random_matrix(gen, 5, 3, 2.0), b2 = oracle::random_matrix(gen, 5, 3, 2.0);
    const double f1 = loss_of_stacked(b1, d, idx), f2 = loss_of_stacked(b2, d, idx);
    for (double lam : {0.25, 0.5, 0.75})
      EXPECT_LE(loss_of_stacked(lam * b1 + (1 - lam) * b2, d, idx), lam * f1 + (1 - lam) * f2 + 1e-10);
  }
}

TEST(PairwiseLoss, GradientLipschitzBoundHolds) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 20; ++trial) {
    const AugmentedDesign d = augment(oracle::random_matrix(gen, 40, 5));
    const PairIndex idx = build_pair_index(random_labels(gen, 40, 3));
    const double l = pairwise_lipschitz(d, idx);
    const DenseMatrix b1 = oracle::random_matrix(gen, 6, 3, 0.5), b2 = oracle::random_matrix(gen, 6, 3, 0.5);
    auto grad = [&](const DenseMatrix& b) {
      return pairwise_coef_gradient(CoefficientMatrix::from_stacked(b, 3), d, idx).d_slope;
    };
    EXPECT_LE((grad(b1) - grad(b2)).norm(), l * (b1 - b2).norm() * (1 + 1e-12));
  }
}

TEST(EmpiricalRisk, SeparatedScoresHaveZeroRisk) {
  BinaryMatrix y(4, 1);
  y.set(0, 0, 1);
  y.set(1, 0, 1);
  DenseMatrix h(4, 1);
  h << 5, 4, 1, 0;
  EXPECT_EQ(*empirical_auc_risk(h, build_pair_index(y))[0], 0.0);
}

TEST(EmpiricalRisk, TiesCountAsErrors) {
  BinaryMatrix y(4, 1);
  y.set(0, 0, 1);
  EXPECT_EQ(*empirical_auc_risk(DenseMatrix::Constant(4, 1, 2.0), build_pair_index(y))[0], 1.0);
}

TEST(EmpiricalRisk, DegenerateTaskIsAbsent) {
  BinaryMatrix y(3, 2);
  y.set(0, 1, 1);
  const auto r = empirical_auc_risk(DenseMatrix::Zero(3, 2), build_pair_index(y));
  EXPECT_FALSE(r[0].has_value());
  EXPECT_TRUE(r[1].has_value());
}

TEST(EmpiricalRisk, MatchesBruteForce) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> level(0, 6);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix h(35, 3);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = trial % 2 ? level(gen) : std::normal_distribution<>()(gen);
    const BinaryMatrix y = random_labels(gen, 35, 3);
    const auto r = empirical_auc_risk(h, build_pair_index(y));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(*r[j], oracle::brute_risk(column(h, j), column(y, j)));
  }
}

TEST(EmpiricalRisk, SurrogateDominatesScaledRisk) {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> level(-2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    DenseMatrix h(30, 4);
    for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = trial % 2 ? level(gen) : 3 * std::normal_distribution<>()(gen);
    const PairIndex idx = build_pair_index(random_labels(gen, 30, 4));
    const auto risk = empirical_auc_risk(h, idx);
    const LossValue v = pairwise_loss(h, idx);
    for (std::size_t j = 0; j < 4; ++j)
      if (risk[j]) {
        EXPECT_LE(std::log(2.0) * *risk[j], v.per_task(Eigen::Index(j)) + 1e-12);
      }
  }
}
