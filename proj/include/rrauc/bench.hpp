#pragma once

// Monte Carlo harness: simulate, fit both rank-constrained methods, evaluate
// on held-out data and aggregate mean / sd per cell and metric.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rrauc/error.hpp"
#include "rrauc/io.hpp"
#include "rrauc/metrics.hpp"
#include "rrauc/pgd.hpp"
#include "rrauc/simgen.hpp"

namespace rrauc {

struct Cell {
  std::string setting;
  std::size_t rank = 2;
  DesignKind design = DesignKind::iid;

  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class Method { rrr_likelihood, rrr_auc };

inline const char* to_string(Method m) { return m == Method::rrr_likelihood ? "rrr_likelihood" : "rrr_auc"; }

inline Method parse_method(const std::string& s) {
  if (s == "rrr_likelihood") return Method::rrr_likelihood;
  if (s == "rrr_auc") return Method::rrr_auc;
  throw ConfigError("unknown method '" + s + "'");
}

inline Objective objective_of(Method m) {
  return m == Method::rrr_likelihood ? Objective::logistic_nll : Objective::auc_surrogate;
}

struct BenchmarkPlan {
  std::vector<Cell> cells;
  std::size_t replications = 50;
  std::uint64_t base_seed = 0;
  std::vector<Method> methods = {Method::rrr_likelihood, Method::rrr_auc};
  /// Fit settings shared by all methods; objective and rank are filled per cell.
  FitConfig fit;

  void validate() const {
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (cells.empty()) throw ConfigError("plan has no cells");
    if (methods.empty()) throw ConfigError("plan has no methods");
    for (const auto& c : cells) (void)setting_spec(c.setting, c.rank, c.design);
  }
};

/// Cells of the published tables: 2 (logistic), 3 (probit), 4 (switching sweep).
inline std::vector<Cell> table_cells(int table) {
  std::vector<std::string> settings;
  if (table == 2) settings = {"Logis", "LogisA", "LogisB", "LogisAB"};
  else if (table == 3) settings = {"Probit", "ProbitA", "ProbitB", "ProbitAB"};
  else if (table == 4) settings = {"Switch05", "Switch10", "Switch20", "Switch40"};
  else throw ConfigError("unknown table " + std::to_string(table));
  std::vector<Cell> out;
  if (table == 4) {
    for (const auto& s : settings) out.push_back({s, 2, DesignKind::iid});
    return out;
  }
  for (std::size_t r : {std::size_t{2}, std::size_t{5}})
    for (DesignKind d : {DesignKind::iid, DesignKind::ar})
      for (const auto& s : settings) out.push_back({s, r, d});
  return out;
}

/// Plan keys: cell = <setting> <rank> <design> (repeatable), table = 2|3|4
/// (repeatable), replications, seed, methods (comma list), and the fit keys
/// stop_tol, max_iter, intercept_mode, step.
inline BenchmarkPlan plan_from(const KeyValues& kv) {
  BenchmarkPlan plan;
  for (const auto& t : kv.all("table")) {
    const auto d = parse_double(t);
    if (!d) throw ConfigError("table must be 2, 3 or 4");
    for (auto& c : table_cells(static_cast<int>(*d))) plan.cells.push_back(c);
  }
  for (const auto& line : kv.all("cell")) {
    std::istringstream in(line);
    Cell c;
    std::string design;
    if (!(in >> c.setting >> c.rank >> design)) throw ConfigError("cell must be '<setting> <rank> <design>'");
    c.design = parse_design(design);
    plan.cells.push_back(c);
  }
  plan.replications = kv.get_u64("replications", plan.replications);
  plan.base_seed = kv.get_u64("seed", plan.base_seed);
  if (const auto m = kv.get("methods")) {
    plan.methods.clear();
    for (const auto& s : split(*m, ',')) plan.methods.push_back(parse_method(s));
  }
  plan.fit.stop_tol = kv.get_double("stop_tol", plan.fit.stop_tol);
  plan.fit.max_iter = kv.get_u64("max_iter", plan.fit.max_iter);
  if (const auto s = kv.get("step")) plan.fit.step = parse_step_rule(*s);
  if (const auto i = kv.get("intercept_mode")) {
    if (*i == "zero") plan.fit.intercept_mode = InterceptMode::zero;
    else if (*i == "calibrate") plan.fit.intercept_mode = InterceptMode::calibrate;
    else throw ConfigError("intercept_mode must be zero or calibrate");
  }
  plan.validate();
  return plan;
}

struct ReplicationOutcome {
  bool ok = false;
  EvalReport report;
  std::string message;
};

enum class Metric { auc, est_error, accuracy };
inline constexpr Metric kMetrics[] = {Metric::auc, Metric::est_error, Metric::accuracy};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::auc: return "auc";
    case Metric::est_error: return "est_error";
    case Metric::accuracy: return "accuracy";
  }
  return "?";
}

inline double metric_value(const EvalReport& r, Metric m) {
  switch (m) {
    case Metric::auc: return r.mean_auc;
    case Metric::est_error: return r.est_error.value_or(0.0);
    case Metric::accuracy: return r.accuracy;
  }
  return 0.0;
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t count = 0;
};

/// Sample mean and (n-1) standard deviation; sd = 0 for a single value.
inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

struct ResultTable {
  std::vector<Cell> cells;
  std::vector<Method> methods;
  std::size_t replications = 0;
  /// raw[cell][method][rep]
  std::vector<std::vector<std::vector<ReplicationOutcome>>> raw;

  std::size_t cell_index(const Cell& c) const {
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (cells[i] == c) return i;
    throw ConfigError("cell not in table: " + c.setting);
  }

  std::size_t method_index(Method m) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
      if (methods[i] == m) return i;
    throw ConfigError(std::string("method not in table: ") + to_string(m));
  }

  std::size_t failures(std::size_t cell, std::size_t method) const {
    std::size_t f = 0;
    for (const auto& o : raw[cell][method]) f += o.ok ? 0 : 1;
    return f;
  }

  Summary summary(std::size_t cell, std::size_t method, Metric m) const {
    std::vector<double> v;
    for (const auto& o : raw[cell][method])
      if (o.ok) v.push_back(metric_value(o.report, m));
    return summarize(v);
  }

  Summary summary(const Cell& c, Method method, Metric m) const {
    return summary(cell_index(c), method_index(method), m);
  }
};

/// One replication: simulate with seed base + rep, fit each method on the
/// training split, evaluate on the test split.
inline std::vector<ReplicationOutcome> run_replication(const BenchmarkPlan& plan, const Cell& cell,
                                                       std::size_t rep) {
  SimSpec spec = setting_spec(cell.setting, cell.rank, cell.design);
  spec.seed = plan.base_seed + rep;
  const SimInstance inst = generate(spec);
  std::vector<ReplicationOutcome> out;
  for (Method m : plan.methods) {
    ReplicationOutcome o;
    try {
      FitConfig cfg = plan.fit;
      cfg.objective = objective_of(m);
      cfg.rank = cell.rank;
      cfg.seed = spec.seed;
      const FitResult res = fit(inst.train, cfg);
      o.report = evaluate(res.coef, inst.test, &inst.truth);
      o.ok = true;
    } catch (const Error& e) {
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

/// Runs every (cell, replication) job on `threads` workers. Results land in
/// preassigned slots, so the table does not depend on scheduling.
inline ResultTable run_benchmark(const BenchmarkPlan& plan, std::size_t threads = 1,
                                 std::ostream* progress = nullptr) {
  plan.validate();
  ResultTable table;
  table.cells = plan.cells;
  table.methods = plan.methods;
  table.replications = plan.replications;
  table.raw.assign(plan.cells.size(),
                   std::vector<std::vector<ReplicationOutcome>>(
                       plan.methods.size(), std::vector<ReplicationOutcome>(plan.replications)));

  const std::size_t jobs = plan.cells.size() * plan.replications;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      const std::size_t c = job / plan.replications, rep = job % plan.replications;
      auto outcomes = run_replication(plan, plan.cells[c], rep);
      for (std::size_t m = 0; m < outcomes.size(); ++m) table.raw[c][m][rep] = std::move(outcomes[m]);
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress && threads <= 1 && (finished % plan.replications == 0))
        *progress << "  cell " << plan.cells[c].setting << " r=" << plan.cells[c].rank << ' '
                  << to_string(plan.cells[c].design) << " done\n";
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, jobs));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return table;
}

// ---------------------------------------------------------------------------
// raw replication files

inline void write_raw(std::ostream& out, const ResultTable& t) {
  out << "setting,rank,design,method,replication,status,mean_auc,est_error,accuracy\n";
  for (std::size_t c = 0; c < t.cells.size(); ++c)
    for (std::size_t m = 0; m < t.methods.size(); ++m)
      for (std::size_t r = 0; r < t.replications; ++r) {
        const auto& o = t.raw[c][m][r];
        out << t.cells[c].setting << ',' << t.cells[c].rank << ',' << to_string(t.cells[c].design) << ','
            << to_string(t.methods[m]) << ',' << r << ',' << (o.ok ? "ok" : "failed") << ',';
        if (o.ok) {
          out << format_double(o.report.mean_auc) << ',' << format_double(o.report.est_error.value_or(0.0))
              << ',' << format_double(o.report.accuracy) << '\n';
        } else {
          out << ",,\n";
        }
      }
}

inline ResultTable read_raw(std::istream& in, const std::string& origin = "<results>") {
  ResultTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty results file");
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::size_t, ReplicationOutcome>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw DataError(origin + ":" + std::to_string(lineno) + ": expected 9 fields");
    Cell c{f[0], static_cast<std::size_t>(std::stoul(f[1])), parse_design(f[2])};
    const Method m = parse_method(f[3]);
    std::size_t ci = t.cells.size();
    for (std::size_t i = 0; i < t.cells.size(); ++i)
      if (t.cells[i] == c) ci = i;
    if (ci == t.cells.size()) t.cells.push_back(c);
    std::size_t mi = t.methods.size();
    for (std::size_t i = 0; i < t.methods.size(); ++i)
      if (t.methods[i] == m) mi = i;
    if (mi == t.methods.size()) t.methods.push_back(m);
    ReplicationOutcome o;
    o.ok = f[5] == "ok";
    if (o.ok) {
      auto num = [&](const std::string& s) {
        const auto v = parse_double(s);
        if (!v) throw DataError(origin + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
        return *v;
      };
      o.report.mean_auc = num(f[6]);
      o.report.est_error = num(f[7]);
      o.report.accuracy = num(f[8]);
    }
    rows[{ci, mi}][std::stoul(f[4])] = o;
  }
  for (const auto& [key, reps] : rows) t.replications = std::max(t.replications, reps.size());
  t.raw.assign(t.cells.size(), std::vector<std::vector<ReplicationOutcome>>(
                                   t.methods.size(), std::vector<ReplicationOutcome>(t.replications)));
  for (const auto& [key, reps] : rows) {
    if (reps.size() != t.replications) throw DataError(origin + ": uneven replication counts");
    std::size_t r = 0;
    for (const auto& [idx, o] : reps) t.raw[key.first][key.second][r++] = o;
  }
  return t;
}

// ---------------------------------------------------------------------------
// reports

enum class ReportFormat { csv, markdown };

inline std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// "mean (sd)" at two decimals; printf rounds exact binary ties to even.
inline std::string mean_sd_cell(const Summary& s) { return two_decimals(s.mean) + " (" + two_decimals(s.sd) + ")"; }

inline std::string emit_report(const ResultTable& t, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::csv) {
    out << "setting,rank,design,method,metric,mean,sd,replications,failures\n";
    for (std::size_t c = 0; c < t.cells.size(); ++c)
      for (std::size_t m = 0; m < t.methods.size(); ++m)
        for (Metric metric : kMetrics) {
          const Summary s = t.summary(c, m, metric);
          out << t.cells[c].setting << ',' << t.cells[c].rank << ',' << to_string(t.cells[c].design) << ','
              << to_string(t.methods[m]) << ',' << to_string(metric) << ',' << format_double(s.mean) << ','
              << format_double(s.sd) << ',' << t.replications << ',' << t.failures(c, m) << '\n';
        }
    return out.str();
  }

  out << "Estimation error is ||B_hat - C||_F^2 / (pq); cells are mean (sd) over "
      << t.replications << " replications.\n";
  // blocks keyed by (rank, design) in order of first appearance
  std::vector<std::pair<std::size_t, DesignKind>> blocks;
  for (const auto& c : t.cells) {
    const std::pair<std::size_t, DesignKind> key{c.rank, c.design};
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }
  for (const auto& [rank, design] : blocks) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < t.cells.size(); ++c)
      if (t.cells[c].rank == rank && t.cells[c].design == design) cols.push_back(c);
    out << "\n### r = " << rank << ", design = " << to_string(design) << "\n\n";
    out << "| Metric |";
    for (auto c : cols)
      for (auto m : t.methods) out << ' ' << t.cells[c].setting << ' ' << to_string(m) << " |";
    out << "\n|---|";
    for (std::size_t k = 0; k < cols.size() * t.methods.size(); ++k) out << "---|";
    out << '\n';
    const char* labels[] = {"AUC", "Estimation error", "Prediction accuracy"};
    std::size_t li = 0;
    for (Metric metric : kMetrics) {
      out << "| " << labels[li++] << " |";
      for (auto c : cols)
        for (std::size_t m = 0; m < t.methods.size(); ++m) {
          const Summary s = t.summary(c, m, metric);
          out << ' ' << mean_sd_cell(s) << " |";
        }
      out << '\n';
    }
    for (auto c : cols)
      for (std::size_t m = 0; m < t.methods.size(); ++m)
        if (const auto f = t.failures(c, m))
          out << "\nfailed fits: " << t.cells[c].setting << ' ' << to_string(t.methods[m]) << ": " << f << '\n';
    const bool logistic_block = std::any_of(cols.begin(), cols.end(), [&](std::size_t c) {
      return t.cells[c].setting.rfind("Logis", 0) == 0;
    });
    if (rank == 5 && design == DesignKind::ar && logistic_block)
      out << "\nnote: no reference values for the logistic r = 5 / ar block; the published "
             "figures for it duplicate the r = 2 / iid block.\n";
  }
  return out.str();
}

}  // namespace rrauc
