#pragma once

// Text formats: CSV datasets and matrices, flat key = value config files,
// model files and simulation bundles.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rrauc/data.hpp"
#include "rrauc/error.hpp"
#include "rrauc/pgd.hpp"
#include "rrauc/simgen.hpp"

namespace rrauc {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// key = value files

/// Ordered key/value pairs; keys may repeat. '#' starts a comment.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& origin = "<input>") {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      kv.entries_.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return kv;
  }

  static KeyValues load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return parse(in, path.string());
  }

  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

  std::optional<std::string> get(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k == key) out = v;
    return out;
  }

  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (k == key) out.push_back(v);
    return out;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    const auto d = parse_double(*v);
    if (!d) throw ConfigError("key '" + key + "': not a number: " + *v);
    return *d;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw ConfigError("key '" + key + "': not a nonnegative integer: " + *v);
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("key '" + key + "': not a boolean: " + *v);
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

inline SimSpec sim_spec_from(const KeyValues& kv) {
  SimSpec s;
  if (const auto setting = kv.get("setting")) {
    s = setting_spec(*setting, kv.get_u64("r", 2),
                     parse_design(kv.get("design").value_or("iid")));
  }
  s.n = kv.get_u64("n", s.n);
  s.p = kv.get_u64("p", s.p);
  s.q = kv.get_u64("q", s.q);
  s.r = kv.get_u64("r", s.r);
  if (const auto d = kv.get("design")) s.design = parse_design(*d);
  s.rho = kv.get_double("rho", s.rho);
  if (const auto l = kv.get("link")) s.link = parse_link(*l);
  s.flip_fraction = kv.get_double("flip_fraction", s.flip_fraction);
  s.contaminate_rows = kv.get_u64("contaminate_rows", s.contaminate_rows);
  s.row_scale = kv.get_double("row_scale", s.row_scale);
  s.train_fraction = kv.get_double("train_fraction", s.train_fraction);
  s.seed = kv.get_u64("seed", s.seed);
  s.contaminate_before_split = kv.get_bool("contaminate_before_split", s.contaminate_before_split);
  s.zero_signal = kv.get_bool("zero_signal", s.zero_signal);
  s.validate();
  return s;
}

inline KeyValues to_key_values(const SimSpec& s) {
  KeyValues kv;
  kv.add("n", std::to_string(s.n));
  kv.add("p", std::to_string(s.p));
  kv.add("q", std::to_string(s.q));
  kv.add("r", std::to_string(s.r));
  kv.add("design", to_string(s.design));
  kv.add("rho", format_double(s.rho));
  kv.add("link", to_string(s.link));
  kv.add("flip_fraction", format_double(s.flip_fraction));
  kv.add("contaminate_rows", std::to_string(s.contaminate_rows));
  kv.add("row_scale", format_double(s.row_scale));
  kv.add("train_fraction", format_double(s.train_fraction));
  kv.add("seed", std::to_string(s.seed));
  kv.add("contaminate_before_split", s.contaminate_before_split ? "true" : "false");
  kv.add("zero_signal", s.zero_signal ? "true" : "false");
  return kv;
}

inline FitConfig fit_config_from(const KeyValues& kv, FitConfig cfg = {}) {
  if (const auto o = kv.get("objective")) cfg.objective = parse_objective(*o);
  cfg.rank = kv.get_u64("rank", cfg.rank);
  if (const auto s = kv.get("step")) cfg.step = parse_step_rule(*s);
  cfg.stop_tol = kv.get_double("stop_tol", cfg.stop_tol);
  cfg.max_iter = kv.get_u64("max_iter", cfg.max_iter);
  if (const auto m = kv.get("intercept_mode")) {
    if (*m == "zero") cfg.intercept_mode = InterceptMode::zero;
    else if (*m == "calibrate") cfg.intercept_mode = InterceptMode::calibrate;
    else throw ConfigError("intercept_mode must be zero or calibrate");
  }
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// CSV

struct DatasetSchema {
  /// Explicit response columns; when empty, columns named "y:<task>" are responses.
  std::vector<std::string> response_columns;
};

inline Dataset parse_dataset_csv(std::istream& in, const DatasetSchema& schema = {},
                                 const std::string& origin = "<csv>", std::ostream* log = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty file");
  const auto header = split(line, ',');
  std::vector<bool> is_response(header.size(), false);
  Dataset d;
  std::vector<std::size_t> feature_cols, response_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    bool resp = false;
    std::string name = header[c];
    if (schema.response_columns.empty()) {
      if (name.rfind("y:", 0) == 0) {
        resp = true;
        name = name.substr(2);
      }
    } else {
      resp = std::find(schema.response_columns.begin(), schema.response_columns.end(), name) !=
             schema.response_columns.end();
    }
    is_response[c] = resp;
    (resp ? response_cols : feature_cols).push_back(c);
    (resp ? d.task_names : d.feature_names).push_back(name);
  }
  if (!schema.response_columns.empty() && response_cols.size() != schema.response_columns.size())
    throw DataError(origin + ": some requested response columns are missing from the header");
  if (response_cols.empty()) throw DataError(origin + ": no response columns (prefix names with 'y:')");

  std::vector<std::vector<double>> xs;
  std::vector<std::vector<int>> ys;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(cells.size()));
    std::vector<double> xrow;
    std::vector<int> yrow;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (is_response[c]) {
        if (cells[c] != "0" && cells[c] != "1")
          throw DataError(origin + ": row " + std::to_string(lineno) + ", column '" + header[c] +
                          "': response must be 0 or 1, got '" + cells[c] + "'");
        yrow.push_back(cells[c] == "1" ? 1 : 0);
      } else {
        const auto v = parse_double(cells[c]);
        if (!v || !std::isfinite(*v))
          throw DataError(origin + ": row " + std::to_string(lineno) + ", column '" + header[c] +
                          "': not a finite number: '" + cells[c] + "'");
        xrow.push_back(*v);
      }
    }
    xs.push_back(std::move(xrow));
    ys.push_back(std::move(yrow));
  }
  if (xs.empty()) throw DataError(origin + ": no data rows");

  const auto n = static_cast<Eigen::Index>(xs.size());
  d.X.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  d.Y = BinaryMatrix(xs.size(), response_cols.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (std::size_t k = 0; k < feature_cols.size(); ++k) d.X(i, static_cast<Eigen::Index>(k)) = xs[ui][k];
    for (std::size_t j = 0; j < response_cols.size(); ++j) d.Y.set(ui, j, ys[ui][j]);
  }
  if (log) {
    *log << origin << ": n=" << d.n() << " predictors=" << d.p() << " responses=" << d.q() << '\n';
  }
  return d;
}

inline Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema = {},
                            std::ostream* log = nullptr) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_dataset_csv(in, schema, path.string(), log);
}

inline void write_dataset_csv(std::ostream& out, const Dataset& d) {
  for (std::size_t k = 0; k < d.p(); ++k) {
    out << (k < d.feature_names.size() ? d.feature_names[k] : "x" + std::to_string(k + 1)) << ',';
  }
  for (std::size_t j = 0; j < d.q(); ++j) {
    out << "y:" << (j < d.task_names.size() ? d.task_names[j] : "t" + std::to_string(j + 1))
        << (j + 1 < d.q() ? "," : "\n");
  }
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t k = 0; k < d.p(); ++k)
      out << format_double(d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))) << ',';
    for (std::size_t j = 0; j < d.q(); ++j) out << int(d.Y(i, j)) << (j + 1 < d.q() ? "," : "\n");
  }
}

inline void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset_csv(out, d);
}

/// Numeric matrix with a header line of column names.
inline void save_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << "c" << j + 1 << (j + 1 < m.cols() ? "," : "\n");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << format_double(m(i, j)) << (j + 1 < m.cols() ? "," : "\n");
}

inline DenseMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    std::vector<double> row;
    bool numeric = true;
    for (const auto& c : cells) {
      const auto v = parse_double(c);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-numeric entry");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no rows");
  DenseMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

// ---------------------------------------------------------------------------
// model files

struct ModelFile {
  CoefficientMatrix coef;
  Objective objective = Objective::auc_surrogate;
  std::uint64_t seed = 0;
};

inline void write_model(std::ostream& out, const ModelFile& m) {
  out << "format = rrauc-model-1\n";
  out << "objective = " << to_string(m.objective) << '\n';
  out << "p = " << m.coef.p() << '\n';
  out << "q = " << m.coef.q() << '\n';
  out << "rank = " << m.coef.rank_budget << '\n';
  out << "seed = " << m.seed << '\n';
  out << "intercept =";
  for (Eigen::Index j = 0; j < m.coef.intercept.size(); ++j) out << ' ' << format_double(m.coef.intercept(j));
  out << '\n';
  for (Eigen::Index i = 0; i < m.coef.slope.rows(); ++i) {
    out << "slope." << i << " =";
    for (Eigen::Index j = 0; j < m.coef.slope.cols(); ++j) out << ' ' << format_double(m.coef.slope(i, j));
    out << '\n';
  }
}

inline std::vector<double> parse_numbers(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    const auto v = parse_double(tok);
    if (!v) throw DataError(what + ": not a number: " + tok);
    out.push_back(*v);
  }
  return out;
}

inline ModelFile read_model(std::istream& in, const std::string& origin = "<model>") {
  const KeyValues kv = KeyValues::parse(in, origin);
  if (kv.get("format") != std::optional<std::string>("rrauc-model-1"))
    throw DataError(origin + ": not a model file");
  ModelFile m;
  m.objective = parse_objective(kv.get("objective").value_or("auc"));
  m.seed = kv.get_u64("seed", 0);
  const std::size_t p = kv.get_u64("p", 0), q = kv.get_u64("q", 0);
  if (p == 0 || q == 0) throw DataError(origin + ": missing dimensions");
  m.coef = CoefficientMatrix::zeros(p, q, kv.get_u64("rank", 1));
  const auto icpt = parse_numbers(kv.get("intercept").value_or(""), origin + " intercept");
  if (icpt.size() != q) throw DataError(origin + ": intercept has wrong length");
  for (std::size_t j = 0; j < q; ++j) m.coef.intercept(static_cast<Eigen::Index>(j)) = icpt[j];
  for (std::size_t i = 0; i < p; ++i) {
    const auto key = "slope." + std::to_string(i);
    const auto row = parse_numbers(kv.get(key).value_or(""), origin + " " + key);
    if (row.size() != q) throw DataError(origin + ": " + key + " has wrong length");
    for (std::size_t j = 0; j < q; ++j)
      m.coef.slope(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

inline void save_model(const std::filesystem::path& path, const ModelFile& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, m);
}

inline ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_model(in, path.string());
}

// ---------------------------------------------------------------------------
// simulation bundles

/// Writes train.csv, test.csv, truth.csv and manifest.txt into dir.
inline void save_sim_instance(const std::filesystem::path& dir, const SimInstance& inst) {
  std::filesystem::create_directories(dir);
  save_dataset(dir / "train.csv", inst.train);
  save_dataset(dir / "test.csv", inst.test);
  save_matrix_csv(dir / "truth.csv", inst.truth);
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  KeyValues kv = to_key_values(inst.spec);
  std::string rows;
  for (auto r : inst.train_rows) rows += (rows.empty() ? "" : " ") + std::to_string(r);
  kv.add("train_rows", rows);
  std::string flips;
  for (auto [i, j] : inst.contamination.flipped)
    flips += (flips.empty() ? "" : " ") + std::to_string(i) + ":" + std::to_string(j);
  kv.add("flipped", flips);
  std::string scaled;
  for (auto r : inst.contamination.scaled_rows) scaled += (scaled.empty() ? "" : " ") + std::to_string(r);
  kv.add("scaled_rows", scaled);
  kv.write(out);
}

}  // namespace rrauc
