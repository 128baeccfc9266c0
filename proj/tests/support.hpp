#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "rrauc/rrauc.hpp"

namespace testing_support {

inline rrauc::BinaryMatrix random_labels(std::mt19937_64& gen, std::size_t n, std::size_t q, double p = 0.5) {
  std::bernoulli_distribution bd(p);
  rrauc::BinaryMatrix y(n, q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < q; ++j) y.set(i, j, bd(gen) ? 1 : 0);
  return y;
}

inline rrauc::Dataset make_dataset(const rrauc::DenseMatrix& x, const rrauc::BinaryMatrix& y) {
  rrauc::Dataset d;
  d.X = x;
  d.Y = y;
  return d;
}

/// Random dataset whose labels follow a logistic model with a rank-r truth.
inline rrauc::Dataset logistic_dataset(std::mt19937_64& gen, std::size_t n, std::size_t p, std::size_t q,
                                       std::size_t r, double scale = 1.0) {
  const auto x = oracle::random_matrix(gen, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  const oracle::Mat c = scale * oracle::random_low_rank(gen, static_cast<Eigen::Index>(p),
                                                        static_cast<Eigen::Index>(q),
                                                        static_cast<Eigen::Index>(r));
  const oracle::Mat eta = x * c;
  std::uniform_real_distribution<double> ud(0, 1);
  rrauc::BinaryMatrix y(n, q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < q; ++j)
      y.set(i, j, ud(gen) < rrauc::sigmoid(eta(Eigen::Index(i), Eigen::Index(j))) ? 1 : 0);
  return make_dataset(x, y);
}

inline std::vector<double> column(const rrauc::DenseMatrix& h, std::size_t j) {
  std::vector<double> out(static_cast<std::size_t>(h.rows()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = h(Eigen::Index(i), Eigen::Index(j));
  return out;
}

inline std::vector<int> column(const rrauc::BinaryMatrix& y, std::size_t j) {
  std::vector<int> out(y.rows());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = y(i, j);
  return out;
}

}  // namespace testing_support
