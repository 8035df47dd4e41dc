// Command-line front end: fit models from CSV samples, evaluate them, run
// comparison sweeps, and check kernel derivatives against finite differences.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kexpfam/cross_validation.hpp"
#include "kexpfam/csv.hpp"
#include "kexpfam/density_model.hpp"
#include "kexpfam/errors.hpp"
#include "kexpfam/experiment.hpp"
#include "kexpfam/fitted_model.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/metrics.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/score_system.hpp"
#include "kexpfam/serialization.hpp"
#include "kexpfam/solve.hpp"
#include "kexpfam/spectral.hpp"
#include "kexpfam/targets.hpp"

namespace {

using namespace kexpfam;

struct FitArgs {
  std::string samples_path;
  std::string config_path;
  std::string output = "model.json";
  std::string cv_table_path;
  std::string cv_summary_path;
  bool has_seed = false;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = take from config
};

SystemFitter fitter_for(const FitMethod& method) {
  switch (method.kind) {
    case FitMethodKind::Tikhonov:
      return tikhonov_fitter();
    case FitMethodKind::Clipped:
      return clipped_fitter(method.clip_M);
    case FitMethodKind::Spectral:
      return spectral_fitter(filter_kind_from_string(method.filter_name));
  }
  throw ConfigError("unknown fit method");
}

int run_fit(const FitArgs& args) {
  const Mat samples = load_samples_csv(args.samples_path);
  FitConfig config = fit_config_from_json(load_json_file(args.config_path));
  if (args.has_seed) config.seed = args.seed;
  if (args.threads > 0) config.threads = args.threads;
  if (!config.base)
    throw ConfigError("fit config: missing base measure");

  KernelSpec kernel = config.kernels.front();
  double lambda = config.lambdas.front();
  const SystemFitter fitter = fitter_for(config.method);

  const bool needs_cv = config.kernels.size() > 1 || config.lambdas.size() > 1;
  if (needs_cv) {
    CvResult cv = cross_validate(samples, config.kernels, config.lambdas,
                                 *config.base, config.cv_folds, config.seed,
                                 CvCriterion::HeldOutScore, fitter,
                                 config.threads);
    kernel = cv.best_kernel;
    lambda = cv.best_lambda;
    if (!args.cv_table_path.empty()) {
      std::ofstream table(args.cv_table_path);
      if (!table)
        throw ConfigError("cannot open " + args.cv_table_path +
                          " for writing");
      write_cv_table_csv(table, cv);
    }
    if (!args.cv_summary_path.empty())
      save_json_file(cv_summary_json(cv, config.cv_folds),
                     args.cv_summary_path);
  }

  ScoreSystem sys = assemble(samples, kernel, *config.base, lambda,
                             config.threads);
  FittedModel model = fitter(sys, lambda);
  save_model_json(model, args.output);
  std::cout << "wrote " << args.output << " (n=" << model.n()
            << ", d=" << model.d()
            << ", kernel=" << kernel_family_name(kernel.family)
            << ", lambda=" << lambda << ")\n";
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string samples_path;
  std::string output;
  std::string target_name;
  int ref_samples = 10000;
  std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& args) {
  FittedModel model = load_model_json(args.model_path);
  const Mat samples = load_samples_csv(args.samples_path);
  const int d = model.d();
  auto density = as_density(std::move(model));

  json metrics;
  metrics["n_eval"] = samples.rows();
  metrics["d"] = d;
  metrics["score_objective"] = score_objective(*density, samples);

  if (!args.target_name.empty()) {
    if (args.ref_samples < 2)
      throw ConfigError("--ref-samples must be >= 2");
    const TargetSpec target = target_from_name(args.target_name);
    auto truth = target_density(target, d);
    const Mat ref = sample_target(target, args.ref_samples, d,
                                  mix_seed(args.seed, "eval|ref"));
    metrics["correlation"] = correlation(*density, *truth, ref);
    metrics["target"] = args.target_name;
  }

  if (args.output.empty()) {
    std::cout << metrics.dump(2) << '\n';
  } else {
    save_json_file(metrics, args.output);
    std::cout << "wrote " << args.output << '\n';
  }
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  std::string output;
  std::string summary_path;
  bool has_seed = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

std::string derived_summary_path(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0)
    return csv_path.substr(0, csv_path.size() - suffix.size()) +
           "_summary.json";
  return csv_path + ".summary.json";
}

int run_experiment_cmd(const ExperimentArgs& args) {
  ExperimentConfig config =
      experiment_config_from_json(load_json_file(args.config_path));
  if (args.has_seed) config.seed = args.seed;
  if (args.threads > 0) config.threads = args.threads;
  if (!args.output.empty()) config.output = args.output;

  const std::vector<ResultRow> rows = run_experiment(config);

  std::ofstream out(config.output);
  if (!out)
    throw ConfigError("cannot open " + config.output + " for writing");
  write_results_csv(out, rows);

  const std::string summary_path = args.summary_path.empty()
                                       ? derived_summary_path(config.output)
                                       : args.summary_path;
  save_json_file(experiment_summary_json(config, rows), summary_path);

  int failures = 0;
  for (const ResultRow& row : rows)
    if (!row.error.empty()) ++failures;
  std::cout << "wrote " << config.output << " and " << summary_path << " ("
            << rows.size() << " rows, " << failures << " failures)\n";
  // Per-row failures are recorded in the CSV error column by design; the
  // sweep itself succeeded.
  return 0;
}

struct CheckArgs {
  std::string kernel_path;
  std::vector<int> dims = {1, 2, 5};
  int pairs = 100;
  double step = 1e-4;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  std::string output;
};

int run_check_derivatives(const CheckArgs& args) {
  const KernelSpec spec = kernel_from_json(load_json_file(args.kernel_path));
  if (args.pairs < 1) throw ConfigError("--pairs must be >= 1");

  std::string report;
  double worst = 0.0;
  for (int d : args.dims) {
    if (d < 1) throw ConfigError("--dims entries must be >= 1");
    const FiniteDiffReport r = finite_diff_check_suite(
        spec, d, args.pairs, args.step,
        mix_seed(args.seed, "fdcheck|" + std::to_string(d)));
    char line[160];
    std::snprintf(line, sizeof(line),
                  "d=%d  max_rel_error=%.3e  worst=%s(i=%d, j=%d)\n", d,
                  r.max_rel_error, to_string(r.worst_pattern), r.worst_i,
                  r.worst_j);
    report += line;
    worst = std::max(worst, r.max_rel_error);
  }
  char line[160];
  std::snprintf(line, sizeof(line), "overall max_rel_error=%.3e  tol=%.3e  %s\n",
                worst, args.tol, worst < args.tol ? "PASS" : "FAIL");
  report += line;

  if (args.output.empty()) {
    std::cout << report;
  } else {
    std::ofstream out(args.output);
    if (!out)
      throw ConfigError("cannot open " + args.output + " for writing");
    out << report;
    std::cout << "wrote " << args.output << '\n';
  }
  return worst < args.tol ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "kexpfam: score-matched exponential-family density estimation"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit a model from a samples CSV and a JSON config");
  fit->add_option("--samples", fit_args.samples_path, "training samples CSV")
      ->required();
  fit->add_option("--config", fit_args.config_path, "fit configuration JSON")
      ->required();
  fit->add_option("--output", fit_args.output, "model JSON path");
  fit->add_option("--cv-table", fit_args.cv_table_path,
                  "write the cross-validation score table CSV here");
  fit->add_option("--cv-summary", fit_args.cv_summary_path,
                  "write the cross-validation selection JSON here");
  CLI::Option* fit_seed =
      fit->add_option("--seed", fit_args.seed, "override the config seed");
  fit->add_option("--threads", fit_args.threads,
                  "override the config thread count");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Evaluate a saved model on a samples CSV");
  eval->add_option("--model", eval_args.model_path, "model JSON path")
      ->required();
  eval->add_option("--samples", eval_args.samples_path,
                   "evaluation samples CSV")
      ->required();
  eval->add_option("--output", eval_args.output,
                   "metrics JSON path (default: stdout)");
  eval->add_option("--target", eval_args.target_name,
                   "analytic target (stdnormal | gauss_mix) for correlation");
  eval->add_option("--ref-samples", eval_args.ref_samples,
                   "reference draws for the correlation metric");
  eval->add_option("--seed", eval_args.seed, "seed for reference draws");

  ExperimentArgs exp_args;
  CLI::App* experiment = app.add_subcommand(
      "experiment", "Run the method-comparison sweep from a JSON config");
  experiment->add_option("--config", exp_args.config_path,
                         "experiment configuration JSON")
      ->required();
  experiment->add_option("--output", exp_args.output,
                         "results CSV path (overrides the config)");
  experiment->add_option("--summary", exp_args.summary_path,
                         "summary JSON path (default: derived from the CSV)");
  CLI::Option* exp_seed = experiment->add_option("--seed", exp_args.seed,
                                                 "override the config seed");
  experiment->add_option("--threads", exp_args.threads,
                         "override the config thread count");

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand(
      "check-derivatives",
      "Compare analytic kernel derivatives against finite differences");
  check->add_option("--kernel", check_args.kernel_path, "kernel JSON path")
      ->required();
  check->add_option("--dims", check_args.dims, "dimensions to test")
      ->delimiter(',');
  check->add_option("--pairs", check_args.pairs, "random point pairs per dim");
  check->add_option("--step", check_args.step, "finite-difference step");
  check->add_option("--tol", check_args.tol, "pass/fail threshold");
  check->add_option("--seed", check_args.seed, "seed for the point pairs");
  check->add_option("--output", check_args.output,
                    "report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  }

  try {
    fit_args.has_seed = fit_seed->count() > 0;
    exp_args.has_seed = exp_seed->count() > 0;
    if (fit->parsed()) return run_fit(fit_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (experiment->parsed()) return run_experiment_cmd(exp_args);
    if (check->parsed()) return run_check_derivatives(check_args);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
