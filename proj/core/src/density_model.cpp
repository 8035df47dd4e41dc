#include "kexpfam/density_model.hpp"

#include <cmath>
#include <numbers>

#include "kexpfam/errors.hpp"

namespace kexpfam {

void DensityModel::log_parts(const Vec& x, double* logp, Vec* grad,
                             Vec* lap) const {
  if (logp) *logp = log_unnormalized(x);
  if (grad) *grad = grad_log(x);
  if (lap) *lap = laplacian_diag_log(x);
}

GaussianMixtureDensity::GaussianMixtureDensity(Mat means, Vec weights,
                                               double variance)
    : means_(std::move(means)), s2_(variance) {
  const int m = static_cast<int>(means_.rows());
  if (m < 1 || means_.cols() < 1)
    throw ConfigError("gaussian mixture: need at least one component");
  if (weights.size() != m)
    throw ConfigError("gaussian mixture: weight/component count mismatch");
  if (!(s2_ > 0.0) || !std::isfinite(s2_))
    throw ConfigError("gaussian mixture: variance must be > 0");
  if (!means_.allFinite()) throw ConfigError("gaussian mixture: non-finite means");
  const double wsum = weights.sum();
  if (!(wsum > 0.0) || (weights.array() < 0.0).any())
    throw ConfigError("gaussian mixture: weights must be nonnegative, sum > 0");
  log_w_ = (weights / wsum).array().max(1e-300).log();
  log_norm_ =
      -0.5 * means_.cols() * std::log(2.0 * std::numbers::pi * s2_);
}

void GaussianMixtureDensity::log_parts(const Vec& x, double* logp, Vec* grad,
                                       Vec* lap) const {
  const int m = static_cast<int>(means_.rows());
  const int d = dim();
  if (x.size() != d)
    throw ConfigError("gaussian mixture: point dimension mismatch");

  // Component log-weights a_m = log w_m - |x - mu_m|^2 / (2 s2), stabilized
  // by the max; responsibilities r_m = softmax(a_m).
  Vec a(m);
  for (int k = 0; k < m; ++k)
    a(k) = log_w_(k) -
           (x - means_.row(k).transpose()).squaredNorm() / (2.0 * s2_);
  const double a_max = a.maxCoeff();
  Vec r = (a.array() - a_max).exp();
  const double z = r.sum();
  r /= z;

  if (logp) *logp = a_max + std::log(z) + log_norm_;
  if (grad || lap) {
    Vec gbar = Vec::Zero(d);
    Vec g2bar = Vec::Zero(d);
    for (int k = 0; k < m; ++k) {
      const double rk = r(k);
      if (rk == 0.0) continue;
      for (int i = 0; i < d; ++i) {
        const double g = (means_(k, i) - x(i)) / s2_;
        gbar(i) += rk * g;
        g2bar(i) += rk * g * g;
      }
    }
    if (grad) *grad = gbar;
    if (lap)
      // var_r(g_i) - 1/s2, by differentiating the responsibilities
      *lap = g2bar - gbar.cwiseProduct(gbar) - Vec::Constant(d, 1.0 / s2_);
  }
}

double GaussianMixtureDensity::log_unnormalized(const Vec& x) const {
  double logp = 0.0;
  log_parts(x, &logp, nullptr, nullptr);
  return logp;
}

Vec GaussianMixtureDensity::grad_log(const Vec& x) const {
  Vec grad(dim());
  log_parts(x, nullptr, &grad, nullptr);
  return grad;
}

Vec GaussianMixtureDensity::laplacian_diag_log(const Vec& x) const {
  Vec lap(dim());
  log_parts(x, nullptr, nullptr, &lap);
  return lap;
}

FittedDensity::FittedDensity(FittedModel model) : model_(std::move(model)) {}

void FittedDensity::log_parts(const Vec& x, double* logp, Vec* grad,
                              Vec* lap) const {
  model_.eval_f_parts(x, logp, grad, lap);
  const BaseMeasure& base = model_.base();
  if (logp) *logp += base.log_density(x);
  if (grad) *grad += base.grad_log_density(x);
  if (lap) *lap += base.laplacian_diag_log_density(x);
}

double FittedDensity::log_unnormalized(const Vec& x) const {
  double logp = 0.0;
  log_parts(x, &logp, nullptr, nullptr);
  return logp;
}

Vec FittedDensity::grad_log(const Vec& x) const {
  Vec grad(dim());
  log_parts(x, nullptr, &grad, nullptr);
  return grad;
}

Vec FittedDensity::laplacian_diag_log(const Vec& x) const {
  Vec lap(dim());
  log_parts(x, nullptr, nullptr, &lap);
  return lap;
}

std::unique_ptr<DensityModel> as_density(FittedModel model) {
  return std::make_unique<FittedDensity>(std::move(model));
}

}  // namespace kexpfam
