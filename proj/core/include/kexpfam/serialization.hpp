#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kexpfam/base_measure.hpp"
#include "kexpfam/cross_validation.hpp"
#include "kexpfam/experiment.hpp"
#include "kexpfam/fitted_model.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/spectral.hpp"

namespace kexpfam {

using json = nlohmann::json;

// All *_from_json functions throw ConfigError on missing keys, wrong types,
// unknown keys, or values that fail the target type's validation. Doubles are
// emitted with round-trip precision, so save/load reproduces models exactly.

// Kernel: {"family": "gaussian"|"gaussian_poly2"|"imq", "sigma": f, "r": f,
// "c": f, "beta": f}; fields a family does not use may be omitted, and the
// remaining ones default to valid values for that family.
json to_json(const KernelSpec& spec);
KernelSpec kernel_from_json(const json& j);

// Base measure: {"family": "gaussian", "mu": [...], "s": f} or
// {"family": "uniform", "a": [...], "b": [...]}. Custom base measures hold
// callbacks and cannot be serialized (ConfigError).
json to_json(const BaseMeasure& base);
BaseMeasure base_from_json(const json& j);

// Spectral filter: {"filter": "tikhonov"|"cutoff"|"showalter", "lambda": f}.
json to_json(const FilterSpec& spec);
FilterSpec filter_from_json(const json& j);

// Fitted model: {"kernel", "base", "lambda", "method", "alpha", "beta",
// "samples"}; method is {"name": "tikhonov"} | {"name": "clipped", "M": f} |
// {"name": "spectral", "filter": name}.
json to_json(const FittedModel& model);
FittedModel model_from_json(const json& j);
void save_model_json(const FittedModel& model, const std::string& path);
FittedModel load_model_json(const std::string& path);

// Experiment configuration (strict: unknown keys are rejected). All keys are
// optional except "methods"; absent keys keep the struct defaults.
json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const json& j);

// Single-fit configuration for the command-line `fit` subcommand:
//   {"kernel": {...} | "kernels": [{...}, ...],
//    "base": {...},                              (required)
//    "lambda": f | "lambda_grid": [...],
//    "method": {"name": ...},                    (default tikhonov)
//    "cv_folds": int, "seed": int, "threads": int}
// Grids with more than one point trigger cross-validated selection.
struct FitConfig {
  std::vector<KernelSpec> kernels;
  std::vector<double> lambdas = {1e-2};
  std::optional<BaseMeasure> base;
  FitMethod method = FitMethod::tikhonov();
  int cv_folds = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};
FitConfig fit_config_from_json(const json& j);

// Cross-validation outcome: the selected configuration plus grid shape.
json cv_summary_json(const CvResult& result, int folds);

// Experiment outcome: the full configuration (so grid defaults are recorded),
// per-(method, target, n, d) aggregates, and the determinism hash.
json experiment_summary_json(const ExperimentConfig& config,
                             const std::vector<ResultRow>& rows);

// File helpers; parse failures surface as ConfigError with the path.
json load_json_file(const std::string& path);
void save_json_file(const json& j, const std::string& path);

}  // namespace kexpfam
