#include "kexpfam/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "kexpfam/errors.hpp"

namespace kexpfam {

FilterSpec make_filter(FilterKind kind, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("filter lambda must be > 0 and finite");
  return FilterSpec{kind, lambda};
}

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Tikhonov:
      return "tikhonov";
    case FilterKind::SpectralCutoff:
      return "cutoff";
    case FilterKind::Showalter:
      return "showalter";
  }
  return "?";
}

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "tikhonov") return FilterKind::Tikhonov;
  if (name == "cutoff") return FilterKind::SpectralCutoff;
  if (name == "showalter") return FilterKind::Showalter;
  throw ConfigError("unknown filter '" + name +
                    "' (expected tikhonov|cutoff|showalter)");
}

double filter_value(const FilterSpec& spec, double alpha_eig) {
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
    throw ConfigError("filter_value: lambda must be > 0 and finite");
  if (!(alpha_eig >= 0.0))
    throw ConfigError("filter_value: eigenvalue argument must be >= 0");
  switch (spec.kind) {
    case FilterKind::Tikhonov:
      return 1.0 / (alpha_eig + spec.lambda);
    case FilterKind::SpectralCutoff:
      return alpha_eig >= spec.lambda ? 1.0 / alpha_eig : 0.0;
    case FilterKind::Showalter:
      // -expm1(-a/lambda)/a is exact near 0; the a == 0 limit is 1/lambda.
      return alpha_eig > 0.0
                 ? -std::expm1(-alpha_eig / spec.lambda) / alpha_eig
                 : 1.0 / spec.lambda;
  }
  throw ConfigError("unknown filter kind");
}

FittedModel solve_spectral(const ScoreSystem& sys, const FilterSpec& spec) {
  if (!(spec.lambda > 0.0) || !std::isfinite(spec.lambda))
    throw ConfigError("solve_spectral: lambda must be > 0 and finite");
  const int nd = sys.n * sys.d;

  Eigen::SelfAdjointEigenSolver<Mat> es(sys.G);
  if (es.info() != Eigen::Success)
    throw NumericError("solve_spectral: eigendecomposition failed");
  const Vec& evals = es.eigenvalues();
  const double max_eig = std::max(evals.maxCoeff(), 0.0);
  const double floor = 1e-12 * max_eig;

  const double g0 = filter_value(spec, 0.0);
  Vec beta = Vec::Zero(nd);
  for (int l = 0; l < nd; ++l) {
    const double gram_eig = evals(l);
    if (gram_eig <= floor) continue;  // numerical null space of the span
    const double mu = gram_eig / sys.n;
    const double weight = es.eigenvectors().col(l).dot(sys.h);
    const double coef = (filter_value(spec, mu) - g0) * (weight / gram_eig);
    beta.noalias() -= coef * es.eigenvectors().col(l);
  }

  return FittedModel(sys.kernel, sys.base, sys.samples, spec.lambda,
                     FitMethod::spectral(to_string(spec.kind)), -g0,
                     std::move(beta));
}

}  // namespace kexpfam
