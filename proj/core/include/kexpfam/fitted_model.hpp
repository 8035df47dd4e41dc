#pragma once

#include <string>

#include "kexpfam/base_measure.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

struct ScoreSystem;

enum class FitMethodKind { Tikhonov, Clipped, Spectral };

struct FitMethod {
  FitMethodKind kind = FitMethodKind::Tikhonov;
  double clip_M = 0.0;        // Clipped only
  std::string filter_name;    // Spectral only: "tikhonov"|"cutoff"|"showalter"

  static FitMethod tikhonov();
  static FitMethod clipped(double M);
  static FitMethod spectral(std::string filter_name);
  std::string label() const;
};

// The fitted unnormalized log-density model log p(y) = f(y) + l(y), where
//   f(y) = alpha * xi_hat(y) + sum_{b,j} beta[b*d+j] * dk(X_b, y)/dx_j
//   xi_hat(y) = (1/n) sum_{a,i} [ dk(X_a,y)/dx_i * dl(X_a)/dx_i
//                                 + d^2 k(X_a,y)/dx_i^2 ]
// (kernel derivatives taken in the sample slot). Immutable after
// construction; safe for concurrent evaluation.
class FittedModel {
 public:
  FittedModel(KernelSpec kernel, BaseMeasure base, Mat samples, double lambda,
              FitMethod method, double alpha, Vec beta);

  double eval_f(const Vec& y) const;
  Vec eval_grad_f(const Vec& y) const;
  Vec eval_laplacian_diag_f(const Vec& y) const;       // d^2 f / dy_m^2
  double log_unnormalized_density(const Vec& y) const; // f(y) + l(y)

  // One pass over the samples filling any non-null output. grad/lap must be
  // pre-sized to d. Used by the metric loops.
  void eval_f_parts(const Vec& y, double* f, Vec* grad, Vec* lap) const;

  int n() const { return static_cast<int>(samples_.rows()); }
  int d() const { return static_cast<int>(samples_.cols()); }
  const KernelSpec& kernel() const { return kernel_; }
  const BaseMeasure& base() const { return base_; }
  const Mat& samples() const { return samples_; }
  double lambda() const { return lambda_; }
  const FitMethod& method() const { return method_; }
  double alpha() const { return alpha_; }
  const Vec& beta() const { return beta_; }

 private:
  KernelSpec kernel_;
  BaseMeasure base_;
  Mat samples_;
  double lambda_;
  FitMethod method_;
  double alpha_;
  Vec beta_;
  Mat sample_grad_l_;  // cached gradients of l at the samples (for xi_hat)
};

// Convenience builders on top of the solvers.
FittedModel make_model(const ScoreSystem& sys, FitMethod method, double alpha,
                       Vec beta);
FittedModel fit_tikhonov(const Mat& samples, const KernelSpec& kernel,
                         const BaseMeasure& base, double lambda,
                         int threads = 1);
FittedModel fit_clipped(const Mat& samples, const KernelSpec& kernel,
                        const BaseMeasure& base, double lambda, double M,
                        int threads = 1);

}  // namespace kexpfam
