// rrauc: simulate data, fit rank-constrained binary models, evaluate them and
// run the Monte Carlo benchmark.
//
// Exit codes: 0 success, 1 usage error, 2 data validation error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rrauc/rrauc.hpp"

namespace fs = std::filesystem;
using namespace rrauc;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  SimSpec spec = sim_spec_from(KeyValues::load(spec_path));
  if (seed) spec.seed = *seed;
  const SimInstance inst = generate(spec);
  save_sim_instance(out_dir, inst);
  std::cout << "wrote " << out_dir << ": train n=" << inst.train.n() << ", test n=" << inst.test.n()
            << ", p=" << spec.p << ", q=" << spec.q << ", flipped=" << inst.contamination.flipped.size()
            << ", scaled rows=" << inst.contamination.scaled_rows.size() << '\n';
  return kOk;
}

struct FitArgs {
  std::string data, objective = "auc", step, intercept = "calibrate", model_out, responses;
  std::size_t rank = 1;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::uint64_t seed = 0;
};

DatasetSchema schema_from(const std::string& responses) {
  DatasetSchema s;
  if (!responses.empty()) s.response_columns = split(responses, ',');
  return s;
}

int cmd_fit(const FitArgs& a) {
  const Dataset d = load_dataset(a.data, schema_from(a.responses), &std::clog);
  FitConfig cfg;
  cfg.objective = parse_objective(a.objective);
  cfg.rank = a.rank;
  if (!a.step.empty()) cfg.step = parse_step_rule(a.step);
  if (a.tol) cfg.stop_tol = *a.tol;
  if (a.max_iter) cfg.max_iter = *a.max_iter;
  if (a.intercept == "zero") cfg.intercept_mode = InterceptMode::zero;
  else if (a.intercept != "calibrate") throw ConfigError("--intercept must be zero or calibrate");
  cfg.seed = a.seed;

  const FitResult res = fit(d, cfg);
  save_model(a.model_out, {res.coef, cfg.objective, cfg.seed});
  const auto& tr = res.trace;
  std::cout << "objective = " << to_string(cfg.objective) << '\n'
            << "rank = " << cfg.rank << '\n'
            << "step_rule = " << to_string(cfg.effective_step()) << '\n'
            << "iterations = " << tr.records.size() << '\n'
            << "status = " << (tr.status == FitStatus::converged ? "converged" : "max_iter") << '\n'
            << "initial_loss = " << format_double(tr.initial_loss) << '\n'
            << "final_loss = " << format_double(tr.final_loss()) << '\n'
            << "model = " << a.model_out << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path, const std::string& truth_path,
                 const std::string& responses) {
  const ModelFile m = load_model(model_path);
  const Dataset d = load_dataset(data_path, schema_from(responses), &std::clog);
  std::optional<DenseMatrix> truth;
  if (!truth_path.empty()) truth = load_matrix_csv(truth_path);
  const EvalReport r = evaluate(m.coef, d, truth ? &*truth : nullptr);
  std::cout << "mean_auc = " << format_double(r.mean_auc) << '\n';
  if (r.est_error) std::cout << "est_error = " << format_double(*r.est_error) << '\n';
  std::cout << "accuracy = " << format_double(r.accuracy) << '\n'
            << "valid_tasks = " << r.valid_task_count << '\n';
  return kOk;
}

int cmd_benchmark(const std::string& plan_path, std::optional<std::size_t> reps, std::optional<std::uint64_t> seed,
                  const std::string& out_dir, std::size_t threads) {
  BenchmarkPlan plan = plan_from(KeyValues::load(plan_path));
  if (reps) plan.replications = *reps;
  if (seed) plan.base_seed = *seed;
  plan.validate();
  std::clog << "benchmark: " << plan.cells.size() << " cells x " << plan.replications << " replications, "
            << threads << " worker(s)\n";
  const ResultTable t = run_benchmark(plan, threads, &std::clog);
  fs::create_directories(out_dir);
  std::ostringstream raw;
  write_raw(raw, t);
  write_file(fs::path(out_dir) / "raw.csv", raw.str());
  write_file(fs::path(out_dir) / "summary.csv", emit_report(t, ReportFormat::csv));
  write_file(fs::path(out_dir) / "tables.md", emit_report(t, ReportFormat::markdown));
  std::cout << emit_report(t, ReportFormat::markdown);
  return kOk;
}

int cmd_tables(const std::string& results_dir, const std::string& format) {
  ReportFormat f;
  if (format == "csv") f = ReportFormat::csv;
  else if (format == "markdown" || format == "md") f = ReportFormat::markdown;
  else throw ConfigError("--format must be csv or markdown");
  fs::path p = results_dir;
  if (fs::is_directory(p)) p /= "raw.csv";
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  std::cout << emit_report(read_raw(in, p.string()), f);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-constrained multi-response binary models: pairwise AUC surrogate vs logistic likelihood"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Generate one simulated train/test bundle");
  sim->add_option("--spec", spec_path, "key = value simulation spec")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--seed", sim_seed, "seed (overrides the spec)");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit a rank-constrained model to a CSV dataset");
  fitc->add_option("--data", fa.data, "CSV with y:<task> response columns")->required()->check(CLI::ExistingFile);
  fitc->add_option("--objective", fa.objective, "auc or nll")->check(CLI::IsMember({"auc", "nll"}));
  fitc->add_option("--rank", fa.rank, "rank budget")->required()->check(CLI::PositiveNumber);
  fitc->add_option("--step", fa.step, "fixed:<eta> | lipschitz:<c> | backtracking:<beta>:<c0>");
  fitc->add_option("--tol", fa.tol, "relative-change stopping tolerance");
  fitc->add_option("--max-iter", fa.max_iter, "iteration cap");
  fitc->add_option("--intercept", fa.intercept, "zero or calibrate");
  fitc->add_option("--responses", fa.responses, "comma-separated response column names");
  fitc->add_option("--seed", fa.seed, "seed recorded in the model file");
  fitc->add_option("--model-out", fa.model_out, "model file to write")->required();

  std::string model_path, eval_data, truth_path, eval_responses;
  auto* eval = app.add_subcommand("evaluate", "Evaluate a model on a CSV dataset");
  eval->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  eval->add_option("--data", eval_data)->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", truth_path, "true coefficient matrix (p x q CSV)")->check(CLI::ExistingFile);
  eval->add_option("--responses", eval_responses, "comma-separated response column names");

  std::string plan_path, bench_out;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> bench_seed;
  std::size_t threads = 1;
  auto* bench = app.add_subcommand("benchmark", "Run a Monte Carlo benchmark plan");
  bench->add_option("--plan", plan_path)->required()->check(CLI::ExistingFile);
  bench->add_option("--reps", reps, "replications per cell (default from plan, else 50)");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--out", bench_out, "output directory")->required();
  bench->add_option("--threads", threads, "worker count")->check(CLI::PositiveNumber);

  std::string results_dir, format = "markdown";
  auto* tables = app.add_subcommand("tables", "Render a benchmark result directory");
  tables->add_option("--results", results_dir)->required();
  tables->add_option("--format", format, "csv or markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(spec_path, out_dir, sim_seed);
    if (*fitc) return cmd_fit(fa);
    if (*eval) return cmd_evaluate(model_path, eval_data, truth_path, eval_responses);
    if (*bench) return cmd_benchmark(plan_path, reps, bench_seed, bench_out, threads);
    if (*tables) return cmd_tables(results_dir, format);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
