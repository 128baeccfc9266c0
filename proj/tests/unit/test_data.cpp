#include <gtest/gtest.h>

#include "support.hpp"

using namespace rrauc;
using testing_support::random_labels;

TEST(Augment, PrependsColumnOfOnes) {
  DenseMatrix x(1, 1);
  x << 2;
  const AugmentedDesign d = augment(x);
  ASSERT_EQ(d.X0.rows(), 1);
  ASSERT_EQ(d.X0.cols(), 2);
  EXPECT_EQ(d.X0(0, 0), 1.0);
  EXPECT_EQ(d.X0(0, 1), 2.0);
}

TEST(Augment, ZeroDesign) {
  const AugmentedDesign d = augment(DenseMatrix::Zero(3, 2));
  EXPECT_EQ(d.X0.col(0), Vector::Ones(3));
  EXPECT_EQ(d.X0.col(1), Vector::Zero(3));
  EXPECT_EQ(d.X0.col(2), Vector::Zero(3));
  EXPECT_EQ(d.p(), 2u);
}

TEST(Augment, InterceptColumnSumsToRowCount) {
  std::mt19937_64 gen(1);
  const AugmentedDesign d = augment(oracle::random_matrix(gen, 3, 2));
  EXPECT_EQ(d.X0.col(0).sum(), 3.0);
  EXPECT_EQ(DenseMatrix(d.slope_part()), DenseMatrix(d.X0.rightCols(2)));
}

TEST(BinaryMatrix, RejectsNonBinaryValues) {
  BinaryMatrix y(2, 2);
  EXPECT_THROW(y.set(0, 0, 2), DataError);
  EXPECT_THROW(y.set(0, 0, -1), DataError);
  y.set(1, 1, 1);
  y.flip(1, 1);
  y.flip(0, 1);
  EXPECT_EQ(y(1, 1), 0);
  EXPECT_EQ(y(0, 1), 1);
}

TEST(Dataset, RowMismatchIsRejected) {
  Dataset d;
  d.X = DenseMatrix::Zero(3, 2);
  d.Y = BinaryMatrix(2, 1);
  EXPECT_THROW(d.validate(), DataError);
}

TEST(PairIndex, DegenerateTaskIsInvalid) {
  BinaryMatrix y(3, 1);
  for (std::size_t i = 0; i < 3; ++i) y.set(i, 0, 1);
  const PairIndex idx = build_pair_index(y);
  EXPECT_EQ(idx.tasks[0].positives, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(idx.tasks[0].negatives.empty());
  EXPECT_FALSE(idx.tasks[0].valid);
  EXPECT_EQ(idx.valid_count(), 0u);
}

TEST(PairIndex, OnePositiveOneNegative) {
  BinaryMatrix y(2, 1);
  y.set(0, 0, 1);
  const PairIndex idx = build_pair_index(y);
  EXPECT_EQ(idx.tasks[0].positives, (std::vector<std::size_t>{0}));
  EXPECT_EQ(idx.tasks[0].negatives, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(idx.tasks[0].valid);
  EXPECT_EQ(idx.tasks[0].normalizer(), 1.0);
}

TEST(PairIndex, PartitionsRowsAndReconstructsLabels) {
  std::mt19937_64 gen(2);
  const BinaryMatrix y = random_labels(gen, 20, 4);
  const PairIndex idx = build_pair_index(y);
  ASSERT_EQ(idx.q(), 4u);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& t = idx.tasks[j];
    EXPECT_EQ(t.positives.size() + t.negatives.size(), 20u);
    EXPECT_EQ(t.valid, !t.positives.empty() && !t.negatives.empty());
    std::vector<int> rebuilt(20, -1);
    for (auto i : t.positives) rebuilt[i] = 1;
    for (auto i : t.negatives) {
      EXPECT_EQ(rebuilt[i], -1) << "row in both sets";
      rebuilt[i] = 0;
    }
    for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(rebuilt[i], y(i, j));
  }
}

TEST(Scores, ZeroCoefficientsGiveZeroScores) {
  std::mt19937_64 gen(3);
  const AugmentedDesign d = augment(oracle::random_matrix(gen, 5, 3));
  EXPECT_EQ(scores(CoefficientMatrix::zeros(3, 2, 1), d), DenseMatrix::Zero(5, 2));
}

TEST(Scores, InterceptOnlyRowsEqualIntercept) {
  std::mt19937_64 gen(4);
  const AugmentedDesign d = augment(oracle::random_matrix(gen, 5, 3));
  CoefficientMatrix b = CoefficientMatrix::zeros(3, 2, 1);
  b.intercept << 0.5, -2.0;
  const DenseMatrix h = scores(b, d);
  for (Eigen::Index i = 0; i < h.rows(); ++i) EXPECT_EQ(Vector(h.row(i).transpose()), b.intercept);
}

TEST(Scores, MatchesNaiveTripleLoop) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    const AugmentedDesign d = augment(oracle::random_matrix(gen, 17, 6));
    const CoefficientMatrix b = CoefficientMatrix::from_stacked(oracle::random_matrix(gen, 7, 4), 2);
    EXPECT_LE((scores(b, d) - oracle::naive_matmul(d.X0, b.stacked())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Scores, LinearInCoefficients) {
  std::mt19937_64 gen(6);
  const AugmentedDesign d = augment(oracle::random_matrix(gen, 10, 4));
  const DenseMatrix b1 = oracle::random_matrix(gen, 5, 3), b2 = oracle::random_matrix(gen, 5, 3);
  const DenseMatrix lhs = scores(CoefficientMatrix::from_stacked(b1 + b2, 2), d);
  const DenseMatrix rhs = scores(CoefficientMatrix::from_stacked(b1, 2), d) + scores(CoefficientMatrix::from_stacked(b2, 2), d);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Scores, ShapeMismatchIsRejected) {
  const AugmentedDesign d = augment(DenseMatrix::Zero(4, 3));
  EXPECT_THROW(scores(CoefficientMatrix::zeros(2, 2, 1), d), DataError);
}

TEST(CoefficientMatrix, StackRoundTrip) {
  std::mt19937_64 gen(7);
  const DenseMatrix b = oracle::random_matrix(gen, 5, 3);
  const CoefficientMatrix c = CoefficientMatrix::from_stacked(b, 2);
  EXPECT_EQ(c.intercept, Vector(b.row(0).transpose()));
  EXPECT_EQ(c.slope, DenseMatrix(b.bottomRows(4)));
  EXPECT_EQ(c.stacked(), b);
}

TEST(Dataset, SelectRowsKeepsLabelsAligned) {
  std::mt19937_64 gen(8);
  const Dataset d = testing_support::make_dataset(oracle::random_matrix(gen, 6, 2), random_labels(gen, 6, 3));
  const Dataset s = d.select_rows({4, 1});
  EXPECT_EQ(DenseMatrix(s.X.row(0)), DenseMatrix(d.X.row(4)));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(s.Y(0, j), d.Y(4, j));
    EXPECT_EQ(s.Y(1, j), d.Y(1, j));
  }
}
