#include "kexpfam/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "kexpfam/base_measure.hpp"
#include "kexpfam/cross_validation.hpp"
#include "kexpfam/csv.hpp"
#include "kexpfam/density_model.hpp"
#include "kexpfam/errors.hpp"
#include "kexpfam/kde.hpp"
#include "kexpfam/metrics.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/solve.hpp"

namespace kexpfam {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string MethodSpec::name() const {
  switch (kind) {
    case Kind::ScoreMatch:
      return "score_match";
    case Kind::ScoreMatchClipped:
      return "score_match_clipped";
    case Kind::Spectral:
      return std::string("spectral_") + to_string(filter);
    case Kind::Kde:
      return "kde";
  }
  return "?";
}

void validate(const ExperimentConfig& config) {
  if (config.n_grid.empty() || config.d_grid.empty())
    throw ConfigError("experiment: n_grid and d_grid must be nonempty");
  for (int n : config.n_grid)
    if (n < 1) throw ConfigError("experiment: n_grid entries must be >= 1");
  for (int d : config.d_grid)
    if (d < 1) throw ConfigError("experiment: d_grid entries must be >= 1");
  if (config.trials < 1) throw ConfigError("experiment: trials must be >= 1");
  if (config.methods.empty())
    throw ConfigError("experiment: methods must be nonempty");
  if (config.sigma_grid.empty() || config.lambda_grid.empty())
    throw ConfigError("experiment: sigma_grid and lambda_grid must be nonempty");
  for (double s : config.sigma_grid)
    if (!(s > 0.0)) throw ConfigError("experiment: sigma_grid must be positive");
  for (double l : config.lambda_grid)
    if (!(l > 0.0)) throw ConfigError("experiment: lambda_grid must be positive");
  for (double b : config.bandwidth_grid)
    if (!(b > 0.0))
      throw ConfigError("experiment: bandwidth_grid must be positive");
  if (config.cv_folds < 2) throw ConfigError("experiment: cv_folds must be >= 2");
  if (config.eval_samples < 1)
    throw ConfigError("experiment: eval_samples must be >= 1");
  if (!(config.box_halfwidth > 0.0))
    throw ConfigError("experiment: box_halfwidth must be > 0");
  if (config.threads < 1) throw ConfigError("experiment: threads must be >= 1");
  for (const std::string& metric : config.metrics)
    if (metric != "score_objective" && metric != "correlation")
      throw ConfigError("experiment: unknown metric '" + metric + "'");
  const bool needs_scorematch_grid = std::any_of(
      config.methods.begin(), config.methods.end(),
      [](const MethodSpec& m) { return m.kind != MethodSpec::Kind::Kde; });
  (void)needs_scorematch_grid;
  // every (n, d) cell must respect the dense-solver size cap
  for (int n : config.n_grid)
    for (int d : config.d_grid)
      if (static_cast<long long>(n) * d + 1 > config.size_cap)
        throw ConfigError("experiment: n*d+1 exceeds size cap for n=" +
                          std::to_string(n) + ", d=" + std::to_string(d));
  if (config.target.kind == TargetSpec::Kind::GaussMix) {
    const double reach = std::max(std::abs(config.target.mean_pos),
                                  std::abs(config.target.mean_neg));
    if (config.box_halfwidth <= reach)
      throw ConfigError(
          "experiment: box_halfwidth must exceed the mixture mean magnitude");
  }
}

namespace {

KernelSpec kernel_for_sigma(const ExperimentConfig& config, double sigma) {
  switch (config.kernel_family) {
    case KernelFamily::Gaussian:
      return make_gaussian(sigma);
    case KernelFamily::GaussianPoly2:
      return make_gaussian_poly2(sigma, config.kernel_r, config.kernel_c);
    case KernelFamily::InverseMultiquadric:
      return make_imq(sigma, config.imq_beta);
  }
  throw ConfigError("unknown kernel family");
}

bool wants(const ExperimentConfig& config, const char* metric) {
  return std::find(config.metrics.begin(), config.metrics.end(), metric) !=
         config.metrics.end();
}

std::uint64_t task_seed(const ExperimentConfig& config, const std::string& method,
                        int n, int d, int trial, const char* stage) {
  std::ostringstream tag;
  tag << method << '|' << target_name(config.target) << '|' << n << '|' << d
      << '|' << trial << '|' << stage;
  return mix_seed(config.seed, tag.str());
}

ResultRow run_single(const ExperimentConfig& config, const MethodSpec& method,
                     int n, int d, int trial) {
  ResultRow row;
  row.method = method.name();
  row.target = target_name(config.target);
  row.n = n;
  row.d = d;
  row.trial = trial;
  row.score_objective = kNaN;
  row.correlation = kNaN;
  row.selected_sigma = kNaN;
  row.selected_lambda = kNaN;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Mat train = sample_target(config.target, n, d,
                                    task_seed(config, row.method, n, d, trial,
                                              "train"));
    const BaseMeasure base = BaseMeasure::uniform_box(
        Vec::Constant(d, -config.box_halfwidth),
        Vec::Constant(d, config.box_halfwidth));
    const std::uint64_t cv_seed =
        task_seed(config, row.method, n, d, trial, "cv");

    std::unique_ptr<DensityModel> fitted;
    if (method.kind == MethodSpec::Kind::Kde) {
      const std::vector<double> grid = config.bandwidth_grid.empty()
                                           ? default_bandwidth_grid(train)
                                           : config.bandwidth_grid;
      const KdeCvResult cv =
          select_kde_bandwidth(train, grid, config.cv_folds, cv_seed);
      row.selected_sigma = cv.bandwidth;
      fitted = as_density(kde_fit(train, cv.bandwidth));
    } else {
      SystemFitter fitter;
      switch (method.kind) {
        case MethodSpec::Kind::ScoreMatch:
          fitter = tikhonov_fitter();
          break;
        case MethodSpec::Kind::ScoreMatchClipped:
          fitter = clipped_fitter(method.clip_M);
          break;
        case MethodSpec::Kind::Spectral:
          fitter = spectral_fitter(method.filter);
          break;
        default:
          throw ConfigError("unknown method kind");
      }
      std::vector<KernelSpec> kernel_grid;
      kernel_grid.reserve(config.sigma_grid.size());
      for (double sigma : config.sigma_grid)
        kernel_grid.push_back(kernel_for_sigma(config, sigma));
      const CvResult cv = cross_validate(train, kernel_grid, config.lambda_grid,
                                         base, config.cv_folds, cv_seed,
                                         CvCriterion::HeldOutScore, fitter);
      row.selected_sigma = cv.best_kernel.family ==
                                   KernelFamily::InverseMultiquadric
                               ? cv.best_kernel.c
                               : cv.best_kernel.sigma;
      row.selected_lambda = cv.best_lambda;
      ScoreSystem sys = assemble(train, cv.best_kernel, base, cv.best_lambda,
                                 /*threads=*/1, config.size_cap);
      fitted = std::make_unique<FittedDensity>(fitter(sys, cv.best_lambda));
    }

    if (wants(config, "score_objective")) {
      const Mat eval = sample_target(
          config.target, config.eval_samples, d,
          task_seed(config, row.method, n, d, trial, "eval"));
      row.score_objective = score_objective(*fitted, eval);
    }
    if (wants(config, "correlation")) {
      const Mat ref = sample_target(
          config.target, config.eval_samples, d,
          task_seed(config, row.method, n, d, trial, "ref"));
      const auto truth = target_density(config.target, d);
      row.correlation = correlation(*fitted, *truth, ref);
    }
  } catch (const std::exception& err) {
    row.error = err.what();
  }
  row.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  validate(config);

  struct Task {
    const MethodSpec* method;
    int n, d, trial;
  };
  std::vector<Task> tasks;
  for (const MethodSpec& method : config.methods)
    for (int d : config.d_grid)
      for (int n : config.n_grid)
        for (int trial = 0; trial < config.trials; ++trial)
          tasks.push_back(Task{&method, n, d, trial});

  std::vector<ResultRow> rows(tasks.size());
  const int n_tasks = static_cast<int>(tasks.size());
  const int workers = std::min(config.threads, n_tasks);
  if (workers <= 1) {
    for (int t = 0; t < n_tasks; ++t)
      rows[t] = run_single(config, *tasks[t].method, tasks[t].n, tasks[t].d,
                           tasks[t].trial);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int t = next.fetch_add(1);
          if (t >= n_tasks) return;
          rows[t] = run_single(config, *tasks[t].method, tasks[t].n,
                               tasks[t].d, tasks[t].trial);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace {

void append_field(std::string& out, double value) {
  if (std::isnan(value))
    out += "";
  else
    out += format_double(value);
  out += ',';
}

std::string row_key(const ResultRow& row, bool with_wall_time) {
  std::string out;
  out += row.method;
  out += ',';
  out += row.target;
  out += ',';
  out += std::to_string(row.n);
  out += ',';
  out += std::to_string(row.d);
  out += ',';
  out += std::to_string(row.trial);
  out += ',';
  append_field(out, row.score_objective);
  append_field(out, row.correlation);
  if (with_wall_time) append_field(out, row.wall_time_ms);
  append_field(out, row.selected_sigma);
  append_field(out, row.selected_lambda);
  out += '"';
  for (char ch : row.error) {  // RFC-style quote doubling
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

}  // namespace

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "method,target,n,d,trial,score_objective,correlation,wall_time_ms,"
         "selected_sigma,selected_lambda,error\n";
  for (const ResultRow& row : rows)
    out << row_key(row, /*with_wall_time=*/true) << '\n';
}

std::uint64_t determinism_hash(const std::vector<ResultRow>& rows) {
  std::uint64_t state = 0xcbf29ce484222325ULL;
  for (const ResultRow& row : rows) {
    state = fnv1a_update(state, row_key(row, /*with_wall_time=*/false));
    state = fnv1a_update(state, "\n");
  }
  return state;
}

}  // namespace kexpfam
