#include "kexpfam/kde.hpp"

#include <cmath>

#include "kexpfam/errors.hpp"

namespace kexpfam {

namespace {
GaussianMixtureDensity kde_mixture(const KdeModel& kde) {
  const int n = static_cast<int>(kde.samples.rows());
  return GaussianMixtureDensity(kde.samples, Vec::Constant(n, 1.0 / n),
                                kde.bandwidth * kde.bandwidth);
}
}  // namespace

KdeModel kde_fit(const Mat& samples, double bandwidth) {
  if (samples.rows() < 1 || samples.cols() < 1)
    throw ConfigError("kde_fit: empty sample matrix");
  if (!samples.allFinite())
    throw ConfigError("kde_fit: samples contain non-finite values");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ConfigError("kde_fit: bandwidth must be > 0 and finite");
  return KdeModel{samples, bandwidth};
}

double kde_log_density(const KdeModel& kde, const Vec& x) {
  return kde_mixture(kde).log_unnormalized(x);
}

Vec kde_grad_log_density(const KdeModel& kde, const Vec& x) {
  return kde_mixture(kde).grad_log(x);
}

Vec kde_laplacian_diag_log_density(const KdeModel& kde, const Vec& x) {
  return kde_mixture(kde).laplacian_diag_log(x);
}

std::unique_ptr<DensityModel> as_density(const KdeModel& kde) {
  return std::make_unique<GaussianMixtureDensity>(kde_mixture(kde));
}

}  // namespace kexpfam
