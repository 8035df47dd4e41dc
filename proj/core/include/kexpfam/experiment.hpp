#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kexpfam/kernel.hpp"
#include "kexpfam/spectral.hpp"
#include "kexpfam/targets.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// One estimation method entering the comparison sweep.
struct MethodSpec {
  enum class Kind { ScoreMatch, ScoreMatchClipped, Spectral, Kde };
  Kind kind = Kind::ScoreMatch;
  double clip_M = 1.0;                        // ScoreMatchClipped
  FilterKind filter = FilterKind::Tikhonov;   // Spectral
  std::string name() const;
};

struct ExperimentConfig {
  TargetSpec target;
  std::vector<int> n_grid = {200};
  std::vector<int> d_grid = {2};
  int trials = 10;
  std::uint64_t seed = 0;
  std::vector<MethodSpec> methods;

  // Score-matching hyperparameter grids. sigma_grid sets the kernel
  // length-scale (the IMQ family reads it as its scale c).
  std::vector<double> sigma_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> lambda_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  KernelFamily kernel_family = KernelFamily::GaussianPoly2;
  double kernel_r = 0.1;
  double kernel_c = 0.5;
  double imq_beta = 0.5;

  // KDE bandwidth grid; empty selects a Silverman-style default per trial.
  std::vector<double> bandwidth_grid;

  int cv_folds = 5;
  int eval_samples = 10000;  // fresh draws for each metric
  // Fitting uses a uniform base measure on [-box_halfwidth, box_halfwidth]^d.
  double box_halfwidth = 12.0;
  std::vector<std::string> metrics = {"score_objective", "correlation"};
  int threads = 1;
  int size_cap = 20001;
  std::string output = "results.csv";  // default CSV path for the CLI
};

void validate(const ExperimentConfig& config);

struct ResultRow {
  std::string method;
  std::string target;
  int n = 0;
  int d = 0;
  int trial = 0;
  double score_objective = 0.0;   // NaN when not computed
  double correlation = 0.0;       // NaN when not computed
  double wall_time_ms = 0.0;
  double selected_sigma = 0.0;    // KDE reports its bandwidth here
  double selected_lambda = 0.0;   // NaN for KDE
  std::string error;              // empty on success
};

// Runs the full sweep: for each (method, d, n, trial), sample a training
// set, select hyperparameters by cross-validation, fit, and score on fresh
// evaluation draws. Per-row failures are recorded in the error column and
// the run continues. Row seeds depend only on (seed, method, n, d, trial),
// so results are independent of scheduling; rows come back in canonical
// (method, d, n, trial) order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

// FNV-1a hash over the canonical row serialization, excluding the
// wall_time_ms column.
std::uint64_t determinism_hash(const std::vector<ResultRow>& rows);

}  // namespace kexpfam
