#pragma once

// Seeded simulation of multi-response binary data with a rank-r coefficient
// matrix, optional label switching and covariate contamination.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "rrauc/auc_loss.hpp"
#include "rrauc/data.hpp"
#include "rrauc/error.hpp"
#include "rrauc/random.hpp"

namespace rrauc {

/// Standard normal CDF.
inline double probit_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

enum class DesignKind { iid, ar };
enum class Link { logistic, probit };

inline const char* to_string(DesignKind d) { return d == DesignKind::iid ? "iid" : "ar"; }
inline const char* to_string(Link l) { return l == Link::logistic ? "logistic" : "probit"; }

inline DesignKind parse_design(const std::string& s) {
  if (s == "iid") return DesignKind::iid;
  if (s == "ar" || s == "AR") return DesignKind::ar;
  throw ConfigError("unknown design '" + s + "' (expected iid or ar)");
}

inline Link parse_link(const std::string& s) {
  if (s == "logistic" || s == "logis") return Link::logistic;
  if (s == "probit") return Link::probit;
  throw ConfigError("unknown link '" + s + "' (expected logistic or probit)");
}

struct SimSpec {
  std::size_t n = 200;
  std::size_t p = 12;
  std::size_t q = 8;
  std::size_t r = 2;
  DesignKind design = DesignKind::iid;
  double rho = 0.5;
  Link link = Link::logistic;
  double flip_fraction = 0.0;
  std::size_t contaminate_rows = 0;
  double row_scale = 30.0;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  /// Apply both contamination mechanisms to the full sample before splitting.
  bool contaminate_before_split = false;
  /// Test hook: force C = 0.
  bool zero_signal = false;

  std::size_t n_train() const {
    return static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  }

  void validate() const {
    if (n == 0 || p == 0 || q == 0 || r == 0) throw ConfigError("simulation dimensions must be positive");
    if (!(flip_fraction >= 0.0 && flip_fraction < 1.0)) throw ConfigError("flip_fraction must lie in [0, 1)");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (n_train() == 0 || n_train() >= n) throw ConfigError("train/test split leaves an empty side");
    const std::size_t pool = contaminate_before_split ? n : n_train();
    if (contaminate_rows > pool) throw ConfigError("contaminate_rows exceeds available rows");
    if (design == DesignKind::ar && !(std::abs(rho) < 1.0)) throw ConfigError("AR correlation must satisfy |rho| < 1");
  }
};

struct ContaminationRecord {
  /// (row, task) coordinates of switched labels, rows indexed within the
  /// contaminated dataset (training set, or full sample when contaminating
  /// before the split).
  std::vector<std::pair<std::size_t, std::size_t>> flipped;
  std::vector<std::size_t> scaled_rows;

  bool empty() const { return flipped.empty() && scaled_rows.empty(); }
};

struct SimInstance {
  SimSpec spec;
  DenseMatrix truth;  // C, p x q
  Dataset full;       // uncontaminated generated sample
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // indices into full
  std::vector<std::size_t> test_rows;
  ContaminationRecord contamination;
};

inline DenseMatrix ar_covariance(std::size_t p, double rho) {
  DenseMatrix s(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  return s;
}

namespace detail {

enum StreamTag : std::uint64_t { kDesign = 1, kCoef = 2, kResponse = 3, kSplit = 4, kFlip = 5, kScale = 6 };

inline void contaminate(Dataset& d, const SimSpec& spec, ContaminationRecord& rec) {
  const std::size_t n = d.n(), q = d.q();
  const auto n_flip = static_cast<std::size_t>(
      std::llround(spec.flip_fraction * static_cast<double>(n) * static_cast<double>(q)));
  if (n_flip > 0) {
    Rng rng = Rng::stream(spec.seed, kFlip);
    for (auto cell : rng.sample_without_replacement(n * q, n_flip)) {
      const std::size_t i = cell / q, j = cell % q;
      d.Y.flip(i, j);
      rec.flipped.emplace_back(i, j);
    }
  }
  if (spec.contaminate_rows > 0) {
    Rng rng = Rng::stream(spec.seed, kScale);
    rec.scaled_rows = rng.sample_without_replacement(n, spec.contaminate_rows);
    for (auto i : rec.scaled_rows) d.X.row(static_cast<Eigen::Index>(i)) *= spec.row_scale;
  }
}

}  // namespace detail

inline SimInstance generate(const SimSpec& spec) {
  spec.validate();
  SimInstance inst;
  inst.spec = spec;
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto p = static_cast<Eigen::Index>(spec.p);
  const auto q = static_cast<Eigen::Index>(spec.q);
  const auto r = static_cast<Eigen::Index>(spec.r);

  Dataset& full = inst.full;
  full.X.resize(n, p);
  {
    Rng rng = Rng::stream(spec.seed, detail::kDesign);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < p; ++k) full.X(i, k) = rng.normal();
    if (spec.design == DesignKind::ar) {
      const Eigen::LLT<DenseMatrix> chol(ar_covariance(spec.p, spec.rho));
      const DenseMatrix l = chol.matrixL();
      full.X = full.X * l.transpose();  // row x -> L x
    }
  }

  {
    Rng rng = Rng::stream(spec.seed, detail::kCoef);
    DenseMatrix u(p, r), v(q, r);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index k = 0; k < r; ++k) u(i, k) = rng.normal();
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index k = 0; k < r; ++k) v(j, k) = rng.normal();
    inst.truth = spec.zero_signal ? DenseMatrix::Zero(p, q) : DenseMatrix(u * v.transpose());
  }

  {
    Rng rng = Rng::stream(spec.seed, detail::kResponse);
    const DenseMatrix eta = full.X * inst.truth;
    full.Y = BinaryMatrix(spec.n, spec.q);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < q; ++j) {
        const double prob = spec.link == Link::logistic ? sigmoid(eta(i, j)) : probit_cdf(eta(i, j));
        full.Y.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), rng.bernoulli(prob) ? 1 : 0);
      }
  }
  for (Eigen::Index k = 0; k < p; ++k) full.feature_names.push_back("x" + std::to_string(k + 1));
  for (Eigen::Index j = 0; j < q; ++j) full.task_names.push_back("y" + std::to_string(j + 1));

  Dataset source = full;
  if (spec.contaminate_before_split) detail::contaminate(source, spec, inst.contamination);

  {
    Rng rng = Rng::stream(spec.seed, detail::kSplit);
    const auto perm = rng.permutation(spec.n);
    const std::size_t nt = spec.n_train();
    inst.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nt));
    inst.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(nt), perm.end());
    std::sort(inst.train_rows.begin(), inst.train_rows.end());
    std::sort(inst.test_rows.begin(), inst.test_rows.end());
  }
  inst.train = source.select_rows(inst.train_rows);
  inst.test = source.select_rows(inst.test_rows);
  if (!spec.contaminate_before_split) detail::contaminate(inst.train, spec, inst.contamination);
  return inst;
}

/// Named simulation settings: the eight logistic/probit clean and contaminated
/// regimes, plus the label-switching sweep Switch05..Switch40 (logistic link).
inline const std::vector<std::string>& setting_names() {
  static const std::vector<std::string> names = {
      "Logis",  "LogisA",  "LogisB",  "LogisAB",  "Probit",   "ProbitA",
      "ProbitB", "ProbitAB", "Switch05", "Switch10", "Switch20", "Switch40"};
  return names;
}

inline SimSpec setting_spec(const std::string& name, std::size_t rank, DesignKind design) {
  SimSpec s;
  s.r = rank;
  s.design = design;
  auto apply = [&](Link link, bool flips, bool rows) {
    s.link = link;
    s.flip_fraction = flips ? 0.2 : 0.0;
    s.contaminate_rows = rows ? 20 : 0;
  };
  if (name == "Logis") apply(Link::logistic, false, false);
  else if (name == "LogisA") apply(Link::logistic, true, false);
  else if (name == "LogisB") apply(Link::logistic, false, true);
  else if (name == "LogisAB") apply(Link::logistic, true, true);
  else if (name == "Probit") apply(Link::probit, false, false);
  else if (name == "ProbitA") apply(Link::probit, true, false);
  else if (name == "ProbitB") apply(Link::probit, false, true);
  else if (name == "ProbitAB") apply(Link::probit, true, true);
  else if (name.rfind("Switch", 0) == 0 && name.size() == 8) {
    apply(Link::logistic, false, false);
    int pct = 0;
    try {
      pct = std::stoi(name.substr(6));
    } catch (const std::logic_error&) {
      throw ConfigError("unknown setting '" + name + "'");
    }
    if (pct != 5 && pct != 10 && pct != 20 && pct != 40) throw ConfigError("unknown setting '" + name + "'");
    s.flip_fraction = pct / 100.0;
  } else {
    throw ConfigError("unknown setting '" + name + "'");
  }
  return s;
}

}  // namespace rrauc
