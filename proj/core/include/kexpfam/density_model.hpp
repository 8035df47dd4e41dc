#pragma once

#include <memory>

#include "kexpfam/fitted_model.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// Common interface for everything the metrics can score: a fitted model, a
// KDE, or an analytic truth. Log-densities may be unnormalized; every metric
// here is either shift-invariant or normalizes by quadrature.
class DensityModel {
 public:
  virtual ~DensityModel() = default;
  virtual int dim() const = 0;
  virtual double log_unnormalized(const Vec& x) const = 0;
  virtual Vec grad_log(const Vec& x) const = 0;
  virtual Vec laplacian_diag_log(const Vec& x) const = 0;

  // Fills any non-null output in one pass where the implementation can.
  virtual void log_parts(const Vec& x, double* logp, Vec* grad,
                         Vec* lap) const;
};

// Equal-variance isotropic Gaussian mixture with analytic derivatives;
// doubles as the KDE backbone and as the synthetic-target truth.
class GaussianMixtureDensity : public DensityModel {
 public:
  // means: m x d (one component per row); weights must sum to 1.
  GaussianMixtureDensity(Mat means, Vec weights, double variance);

  int dim() const override { return static_cast<int>(means_.cols()); }
  double log_unnormalized(const Vec& x) const override;
  Vec grad_log(const Vec& x) const override;
  Vec laplacian_diag_log(const Vec& x) const override;
  void log_parts(const Vec& x, double* logp, Vec* grad,
                 Vec* lap) const override;

  double variance() const { return s2_; }
  const Mat& means() const { return means_; }

 private:
  Mat means_;
  Vec log_w_;
  double s2_;
  double log_norm_;
};

// Adapter exposing a FittedModel (f + log q0) as a DensityModel.
class FittedDensity : public DensityModel {
 public:
  explicit FittedDensity(FittedModel model);

  int dim() const override { return model_.d(); }
  double log_unnormalized(const Vec& x) const override;
  Vec grad_log(const Vec& x) const override;
  Vec laplacian_diag_log(const Vec& x) const override;
  void log_parts(const Vec& x, double* logp, Vec* grad,
                 Vec* lap) const override;

  const FittedModel& model() const { return model_; }

 private:
  FittedModel model_;
};

std::unique_ptr<DensityModel> as_density(FittedModel model);

}  // namespace kexpfam
