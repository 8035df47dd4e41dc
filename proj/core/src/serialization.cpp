#include "kexpfam/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <utility>

#include "kexpfam/errors.hpp"
#include "kexpfam/targets.hpp"

namespace kexpfam {

namespace {

void check_keys(const json& obj, const char* what,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ConfigError(std::string(what) + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw ConfigError(std::string(what) + ": unknown key \"" + it.key() +
                        "\"");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const char* what) {
  const json* j = find(obj, key);
  if (!j)
    throw ConfigError(std::string(what) + ": missing key \"" + key + "\"");
  return *j;
}

double as_double(const json& j, const char* what) {
  if (!j.is_number())
    throw ConfigError(std::string(what) + ": expected a number");
  return j.get<double>();
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer())
    throw ConfigError(std::string(what) + ": expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const json& j, const char* what) {
  if (!(j.is_number_unsigned() ||
        (j.is_number_integer() && j.get<std::int64_t>() >= 0)))
    throw ConfigError(std::string(what) +
                      ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string as_string(const json& j, const char* what) {
  if (!j.is_string())
    throw ConfigError(std::string(what) + ": expected a string");
  return j.get<std::string>();
}

Vec as_vec(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + ": expected a nonempty array");
  Vec v(static_cast<int>(j.size()));
  for (int i = 0; i < static_cast<int>(j.size()); ++i)
    v[i] = as_double(j[i], what);
  return v;
}

Mat as_mat(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) +
                      ": expected a nonempty array of rows");
  const int n = static_cast<int>(j.size());
  int d = -1;
  Mat m;
  for (int a = 0; a < n; ++a) {
    const json& row = j[a];
    if (!row.is_array() || row.empty())
      throw ConfigError(std::string(what) + ": row " + std::to_string(a) +
                        " is not a nonempty array");
    if (d < 0) {
      d = static_cast<int>(row.size());
      m.resize(n, d);
    } else if (static_cast<int>(row.size()) != d) {
      throw ConfigError(std::string(what) + ": row " + std::to_string(a) +
                        " has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(d));
    }
    for (int i = 0; i < d; ++i) m(a, i) = as_double(row[i], what);
  }
  return m;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (int i = 0; i < static_cast<int>(v.size()); ++i) arr.push_back(v[i]);
  return arr;
}

json mat_to_json(const Mat& m) {
  json arr = json::array();
  for (int a = 0; a < static_cast<int>(m.rows()); ++a) {
    json row = json::array();
    for (int i = 0; i < static_cast<int>(m.cols()); ++i)
      row.push_back(m(a, i));
    arr.push_back(std::move(row));
  }
  return arr;
}

std::vector<double> as_double_list(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + ": expected a nonempty array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& item : j) out.push_back(as_double(item, what));
  return out;
}

std::vector<int> as_int_list(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ConfigError(std::string(what) + ": expected a nonempty array");
  std::vector<int> out;
  out.reserve(j.size());
  for (const json& item : j) out.push_back(as_int(item, what));
  return out;
}

}  // namespace

json to_json(const KernelSpec& spec) {
  json j;
  j["family"] = kernel_family_name(spec.family);
  switch (spec.family) {
    case KernelFamily::Gaussian:
      j["sigma"] = spec.sigma;
      break;
    case KernelFamily::GaussianPoly2:
      j["sigma"] = spec.sigma;
      j["r"] = spec.r;
      j["c"] = spec.c;
      break;
    case KernelFamily::InverseMultiquadric:
      j["c"] = spec.c;
      j["beta"] = spec.beta;
      break;
  }
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  check_keys(j, "kernel", {"family", "sigma", "r", "c", "beta"});
  KernelSpec spec;
  spec.family =
      kernel_family_from_string(as_string(require(j, "family", "kernel"),
                                          "kernel.family"));
  // Valid per-family defaults for absent fields.
  switch (spec.family) {
    case KernelFamily::Gaussian:
    case KernelFamily::GaussianPoly2:
      spec.sigma = 1.0;
      spec.r = 0.0;
      spec.c = 0.0;
      break;
    case KernelFamily::InverseMultiquadric:
      spec.c = 1.0;
      spec.beta = 0.5;
      break;
  }
  if (const json* v = find(j, "sigma")) spec.sigma = as_double(*v, "kernel.sigma");
  if (const json* v = find(j, "r")) spec.r = as_double(*v, "kernel.r");
  if (const json* v = find(j, "c")) spec.c = as_double(*v, "kernel.c");
  if (const json* v = find(j, "beta")) spec.beta = as_double(*v, "kernel.beta");
  validate(spec);
  return spec;
}

json to_json(const BaseMeasure& base) {
  json j;
  switch (base.family()) {
    case BaseMeasure::Family::IsotropicGaussian:
      j["family"] = "gaussian";
      j["mu"] = vec_to_json(base.mu());
      j["s"] = base.s();
      return j;
    case BaseMeasure::Family::UniformBox:
      j["family"] = "uniform";
      j["a"] = vec_to_json(base.support_lo());
      j["b"] = vec_to_json(base.support_hi());
      return j;
    case BaseMeasure::Family::Custom:
      break;
  }
  throw ConfigError("custom base measures are not serializable");
}

BaseMeasure base_from_json(const json& j) {
  check_keys(j, "base", {"family", "mu", "s", "a", "b"});
  const std::string family =
      as_string(require(j, "family", "base"), "base.family");
  if (family == "gaussian") {
    Vec mu = as_vec(require(j, "mu", "gaussian base"), "base.mu");
    const double s = as_double(require(j, "s", "gaussian base"), "base.s");
    return BaseMeasure::isotropic_gaussian(std::move(mu), s);
  }
  if (family == "uniform") {
    Vec a = as_vec(require(j, "a", "uniform base"), "base.a");
    Vec b = as_vec(require(j, "b", "uniform base"), "base.b");
    return BaseMeasure::uniform_box(std::move(a), std::move(b));
  }
  throw ConfigError("unknown base measure family \"" + family +
                    "\" (expected gaussian or uniform)");
}

json to_json(const FilterSpec& spec) {
  return json{{"filter", to_string(spec.kind)}, {"lambda", spec.lambda}};
}

FilterSpec filter_from_json(const json& j) {
  check_keys(j, "filter", {"filter", "lambda"});
  const FilterKind kind = filter_kind_from_string(
      as_string(require(j, "filter", "filter"), "filter.filter"));
  const double lambda =
      as_double(require(j, "lambda", "filter"), "filter.lambda");
  return make_filter(kind, lambda);
}

namespace {

json method_to_json(const FitMethod& method) {
  switch (method.kind) {
    case FitMethodKind::Tikhonov:
      return json{{"name", "tikhonov"}};
    case FitMethodKind::Clipped:
      return json{{"name", "clipped"}, {"M", method.clip_M}};
    case FitMethodKind::Spectral:
      return json{{"name", "spectral"}, {"filter", method.filter_name}};
  }
  throw ConfigError("unknown fit method");
}

FitMethod method_from_json(const json& j) {
  check_keys(j, "method", {"name", "M", "filter"});
  const std::string name =
      as_string(require(j, "name", "method"), "method.name");
  if (name == "tikhonov") {
    check_keys(j, "method", {"name"});
    return FitMethod::tikhonov();
  }
  if (name == "clipped") {
    check_keys(j, "method", {"name", "M"});
    return FitMethod::clipped(as_double(require(j, "M", "clipped method"),
                                        "method.M"));
  }
  if (name == "spectral") {
    check_keys(j, "method", {"name", "filter"});
    const std::string filter = as_string(
        require(j, "filter", "spectral method"), "method.filter");
    filter_kind_from_string(filter);  // name check
    return FitMethod::spectral(filter);
  }
  throw ConfigError("unknown method name \"" + name +
                    "\" (expected tikhonov, clipped, or spectral)");
}

}  // namespace

json to_json(const FittedModel& model) {
  json j;
  j["kernel"] = to_json(model.kernel());
  j["base"] = to_json(model.base());
  j["lambda"] = model.lambda();
  j["method"] = method_to_json(model.method());
  j["alpha"] = model.alpha();
  j["beta"] = vec_to_json(model.beta());
  j["samples"] = mat_to_json(model.samples());
  return j;
}

FittedModel model_from_json(const json& j) {
  check_keys(j, "model",
             {"kernel", "base", "lambda", "method", "alpha", "beta",
              "samples"});
  KernelSpec kernel = kernel_from_json(require(j, "kernel", "model"));
  BaseMeasure base = base_from_json(require(j, "base", "model"));
  const double lambda = as_double(require(j, "lambda", "model"),
                                  "model.lambda");
  FitMethod method = method_from_json(require(j, "method", "model"));
  const double alpha = as_double(require(j, "alpha", "model"), "model.alpha");
  Vec beta = as_vec(require(j, "beta", "model"), "model.beta");
  Mat samples = as_mat(require(j, "samples", "model"), "model.samples");
  return FittedModel(kernel, std::move(base), std::move(samples), lambda,
                     std::move(method), alpha, std::move(beta));
}

void save_model_json(const FittedModel& model, const std::string& path) {
  save_json_file(to_json(model), path);
}

FittedModel load_model_json(const std::string& path) {
  return model_from_json(load_json_file(path));
}

namespace {

json target_to_json(const TargetSpec& target) {
  if (target.kind == TargetSpec::Kind::StdNormal) return json("stdnormal");
  return json{{"name", "gauss_mix"},
              {"mean_pos", target.mean_pos},
              {"mean_neg", target.mean_neg}};
}

TargetSpec target_from_json(const json& j) {
  if (j.is_string()) return target_from_name(j.get<std::string>());
  check_keys(j, "target", {"name", "mean_pos", "mean_neg"});
  TargetSpec target =
      target_from_name(as_string(require(j, "name", "target"), "target.name"));
  if (const json* v = find(j, "mean_pos"))
    target.mean_pos = as_double(*v, "target.mean_pos");
  if (const json* v = find(j, "mean_neg"))
    target.mean_neg = as_double(*v, "target.mean_neg");
  return target;
}

json method_spec_to_json(const MethodSpec& method) {
  if (method.kind == MethodSpec::Kind::ScoreMatchClipped)
    return json{{"name", "score_match_clipped"}, {"M", method.clip_M}};
  return json(method.name());
}

MethodSpec method_spec_from_json(const json& j) {
  MethodSpec method;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    check_keys(j, "methods entry", {"name", "M", "filter"});
    name = as_string(require(j, "name", "methods entry"), "method name");
  }
  if (name == "score_match") {
    method.kind = MethodSpec::Kind::ScoreMatch;
  } else if (name == "score_match_clipped") {
    method.kind = MethodSpec::Kind::ScoreMatchClipped;
    if (j.is_object())
      if (const json* v = find(j, "M"))
        method.clip_M = as_double(*v, "method M");
  } else if (name == "kde") {
    method.kind = MethodSpec::Kind::Kde;
  } else if (name == "spectral") {
    method.kind = MethodSpec::Kind::Spectral;
    if (!j.is_object() || !find(j, "filter"))
      throw ConfigError("spectral method entry requires a \"filter\" key");
    method.filter = filter_kind_from_string(
        as_string(*find(j, "filter"), "method filter"));
  } else if (name.rfind("spectral_", 0) == 0) {
    method.kind = MethodSpec::Kind::Spectral;
    method.filter = filter_kind_from_string(name.substr(9));
  } else {
    throw ConfigError("unknown method \"" + name + "\"");
  }
  if (j.is_object() && method.kind != MethodSpec::Kind::ScoreMatchClipped &&
      find(j, "M"))
    throw ConfigError("method \"" + name + "\" does not take \"M\"");
  if (j.is_object() && method.kind != MethodSpec::Kind::Spectral &&
      find(j, "filter"))
    throw ConfigError("method \"" + name + "\" does not take \"filter\"");
  return method;
}

}  // namespace

json to_json(const ExperimentConfig& config) {
  json j;
  j["target"] = target_to_json(config.target);
  j["n_grid"] = config.n_grid;
  j["d_grid"] = config.d_grid;
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  json methods = json::array();
  for (const MethodSpec& m : config.methods)
    methods.push_back(method_spec_to_json(m));
  j["methods"] = methods;
  j["sigma_grid"] = config.sigma_grid;
  j["lambda_grid"] = config.lambda_grid;
  j["kernel_family"] = kernel_family_name(config.kernel_family);
  j["kernel_r"] = config.kernel_r;
  j["kernel_c"] = config.kernel_c;
  j["imq_beta"] = config.imq_beta;
  j["bandwidth_grid"] = config.bandwidth_grid;
  j["cv_folds"] = config.cv_folds;
  j["eval_samples"] = config.eval_samples;
  j["box_halfwidth"] = config.box_halfwidth;
  j["metrics"] = config.metrics;
  j["threads"] = config.threads;
  j["size_cap"] = config.size_cap;
  j["output"] = config.output;
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  check_keys(j, "experiment config",
             {"target", "n_grid", "d_grid", "trials", "seed", "methods",
              "sigma_grid", "lambda_grid", "kernel_family", "kernel_r",
              "kernel_c", "imq_beta", "bandwidth_grid", "cv_folds",
              "eval_samples", "box_halfwidth", "metrics", "threads",
              "size_cap", "output"});
  ExperimentConfig config;
  if (const json* v = find(j, "target")) config.target = target_from_json(*v);
  if (const json* v = find(j, "n_grid"))
    config.n_grid = as_int_list(*v, "n_grid");
  if (const json* v = find(j, "d_grid"))
    config.d_grid = as_int_list(*v, "d_grid");
  if (const json* v = find(j, "trials")) config.trials = as_int(*v, "trials");
  if (const json* v = find(j, "seed")) config.seed = as_u64(*v, "seed");
  {
    const json& methods = require(j, "methods", "experiment config");
    if (!methods.is_array() || methods.empty())
      throw ConfigError("methods: expected a nonempty array");
    config.methods.clear();
    for (const json& item : methods)
      config.methods.push_back(method_spec_from_json(item));
  }
  if (const json* v = find(j, "sigma_grid"))
    config.sigma_grid = as_double_list(*v, "sigma_grid");
  if (const json* v = find(j, "lambda_grid"))
    config.lambda_grid = as_double_list(*v, "lambda_grid");
  if (const json* v = find(j, "kernel_family"))
    config.kernel_family =
        kernel_family_from_string(as_string(*v, "kernel_family"));
  if (const json* v = find(j, "kernel_r"))
    config.kernel_r = as_double(*v, "kernel_r");
  if (const json* v = find(j, "kernel_c"))
    config.kernel_c = as_double(*v, "kernel_c");
  if (const json* v = find(j, "imq_beta"))
    config.imq_beta = as_double(*v, "imq_beta");
  if (const json* v = find(j, "bandwidth_grid")) {
    // May be empty: an empty grid selects the rule-of-thumb default.
    if (!v->is_array())
      throw ConfigError("bandwidth_grid: expected an array");
    config.bandwidth_grid.clear();
    for (const json& item : *v)
      config.bandwidth_grid.push_back(as_double(item, "bandwidth_grid"));
  }
  if (const json* v = find(j, "cv_folds"))
    config.cv_folds = as_int(*v, "cv_folds");
  if (const json* v = find(j, "eval_samples"))
    config.eval_samples = as_int(*v, "eval_samples");
  if (const json* v = find(j, "box_halfwidth"))
    config.box_halfwidth = as_double(*v, "box_halfwidth");
  if (const json* v = find(j, "metrics")) {
    if (!v->is_array())
      throw ConfigError("metrics: expected an array of strings");
    config.metrics.clear();
    for (const json& item : *v)
      config.metrics.push_back(as_string(item, "metrics"));
  }
  if (const json* v = find(j, "threads"))
    config.threads = as_int(*v, "threads");
  if (const json* v = find(j, "size_cap"))
    config.size_cap = as_int(*v, "size_cap");
  if (const json* v = find(j, "output"))
    config.output = as_string(*v, "output");
  validate(config);
  return config;
}

FitConfig fit_config_from_json(const json& j) {
  check_keys(j, "fit config",
             {"kernel", "kernels", "base", "lambda", "lambda_grid", "method",
              "cv_folds", "seed", "threads"});
  FitConfig config;
  const json* kernel = find(j, "kernel");
  const json* kernels = find(j, "kernels");
  if ((kernel == nullptr) == (kernels == nullptr))
    throw ConfigError(
        "fit config: provide exactly one of \"kernel\" or \"kernels\"");
  if (kernel) {
    config.kernels = {kernel_from_json(*kernel)};
  } else {
    if (!kernels->is_array() || kernels->empty())
      throw ConfigError("fit config: \"kernels\" must be a nonempty array");
    for (const json& item : *kernels)
      config.kernels.push_back(kernel_from_json(item));
  }
  config.base = base_from_json(require(j, "base", "fit config"));
  const json* lambda = find(j, "lambda");
  const json* lambda_grid = find(j, "lambda_grid");
  if (lambda && lambda_grid)
    throw ConfigError(
        "fit config: provide at most one of \"lambda\" or \"lambda_grid\"");
  if (lambda) config.lambdas = {as_double(*lambda, "lambda")};
  if (lambda_grid)
    config.lambdas = as_double_list(*lambda_grid, "lambda_grid");
  for (double l : config.lambdas)
    if (!(l > 0.0) || !std::isfinite(l))
      throw ConfigError("fit config: lambdas must be positive and finite");
  if (const json* v = find(j, "method")) config.method = method_from_json(*v);
  if (const json* v = find(j, "cv_folds"))
    config.cv_folds = as_int(*v, "cv_folds");
  if (config.cv_folds < 2)
    throw ConfigError("fit config: cv_folds must be >= 2");
  if (const json* v = find(j, "seed")) config.seed = as_u64(*v, "seed");
  if (const json* v = find(j, "threads"))
    config.threads = as_int(*v, "threads");
  if (config.threads < 1)
    throw ConfigError("fit config: threads must be >= 1");
  return config;
}

json cv_summary_json(const CvResult& result, int folds) {
  json j;
  j["selected"] = {{"kernel", to_json(result.best_kernel)},
                   {"lambda", result.best_lambda},
                   {"mean_heldout_score", result.best_mean_score}};
  j["folds"] = folds;
  j["table_rows"] = result.table.size();
  return j;
}

json experiment_summary_json(const ExperimentConfig& config,
                             const std::vector<ResultRow>& rows) {
  json j;
  j["config"] = to_json(config);

  struct Acc {
    json key;
    int trials = 0;
    int failures = 0;
    int n_score = 0;
    double score_sum = 0.0, score_sumsq = 0.0;
    int n_corr = 0;
    double corr_sum = 0.0;
  };
  std::vector<Acc> accs;
  std::map<std::string, std::size_t> index;  // key -> position, rows stay ordered
  int failures = 0;
  for (const ResultRow& row : rows) {
    const std::string key = row.method + '|' + row.target + '|' +
                            std::to_string(row.n) + '|' +
                            std::to_string(row.d);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, accs.size()).first;
      Acc acc;
      acc.key = {{"method", row.method},
                 {"target", row.target},
                 {"n", row.n},
                 {"d", row.d}};
      accs.push_back(std::move(acc));
    }
    Acc& acc = accs[it->second];
    acc.trials += 1;
    if (!row.error.empty()) {
      acc.failures += 1;
      failures += 1;
    }
    if (std::isfinite(row.score_objective)) {
      acc.n_score += 1;
      acc.score_sum += row.score_objective;
      acc.score_sumsq += row.score_objective * row.score_objective;
    }
    if (std::isfinite(row.correlation)) {
      acc.n_corr += 1;
      acc.corr_sum += row.correlation;
    }
  }

  json aggregates = json::array();
  for (const Acc& acc : accs) {
    json entry = acc.key;
    entry["trials"] = acc.trials;
    entry["failures"] = acc.failures;
    if (acc.n_score > 0) {
      const double mean = acc.score_sum / acc.n_score;
      entry["mean_score_objective"] = mean;
      if (acc.n_score > 1) {
        const double var =
            (acc.score_sumsq - acc.score_sum * mean) / (acc.n_score - 1);
        entry["stderr_score_objective"] =
            std::sqrt(std::max(var, 0.0) / acc.n_score);
      }
    }
    if (acc.n_corr > 0)
      entry["mean_correlation"] = acc.corr_sum / acc.n_corr;
    aggregates.push_back(std::move(entry));
  }
  j["aggregates"] = aggregates;
  j["rows"] = rows.size();
  j["failures"] = failures;

  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(determinism_hash(rows)));
  j["determinism_hash"] = hash;
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing " + path);
}

}  // namespace kexpfam
