#include "kexpfam/fitted_model.hpp"

#include <cmath>
#include <utility>

#include "kexpfam/errors.hpp"
#include "kexpfam/score_system.hpp"
#include "kexpfam/solve.hpp"

namespace kexpfam {

FitMethod FitMethod::tikhonov() { return FitMethod{FitMethodKind::Tikhonov}; }

FitMethod FitMethod::clipped(double M) {
  FitMethod m;
  m.kind = FitMethodKind::Clipped;
  m.clip_M = M;
  return m;
}

FitMethod FitMethod::spectral(std::string filter_name) {
  FitMethod m;
  m.kind = FitMethodKind::Spectral;
  m.filter_name = std::move(filter_name);
  return m;
}

std::string FitMethod::label() const {
  switch (kind) {
    case FitMethodKind::Tikhonov:
      return "tikhonov";
    case FitMethodKind::Clipped:
      return "clipped";
    case FitMethodKind::Spectral:
      return "spectral:" + filter_name;
  }
  return "?";
}

FittedModel::FittedModel(KernelSpec kernel, BaseMeasure base, Mat samples,
                         double lambda, FitMethod method, double alpha,
                         Vec beta)
    : kernel_(kernel),
      base_(std::move(base)),
      samples_(std::move(samples)),
      lambda_(lambda),
      method_(std::move(method)),
      alpha_(alpha),
      beta_(std::move(beta)) {
  validate(kernel_);
  const int n = static_cast<int>(samples_.rows());
  const int d = static_cast<int>(samples_.cols());
  if (n < 1 || d < 1) throw ConfigError("FittedModel: empty sample matrix");
  if (base_.dim() != d)
    throw ConfigError("FittedModel: base measure dimension mismatch");
  if (beta_.size() != static_cast<Eigen::Index>(n) * d)
    throw ConfigError("FittedModel: beta must have length n*d");
  if (!std::isfinite(alpha_) || !beta_.allFinite() || !samples_.allFinite())
    throw ConfigError("FittedModel: non-finite coefficients or samples");
  sample_grad_l_.resize(n, d);
  for (int a = 0; a < n; ++a) {
    const Vec xa = samples_.row(a).transpose();
    if (!base_.in_support(xa))
      throw ConfigError("FittedModel: sample outside base-measure support");
    sample_grad_l_.row(a) = base_.grad_log_density(xa).transpose();
  }
}

void FittedModel::eval_f_parts(const Vec& y, double* f, Vec* grad,
                               Vec* lap) const {
  if (!base_.in_support(y))
    throw ConfigError("model evaluation point outside the base support");
  const int n = this->n();
  const int d = this->d();
  const double inv_n = 1.0 / n;

  double fsum = 0.0;
  if (grad) grad->setZero();
  if (lap) lap->setZero();

  Vec xa(d);
  for (int a = 0; a < n; ++a) {
    xa = samples_.row(a).transpose();
    const PairDerivs pd(kernel_, xa, y);
    // xi_hat contribution, weighted by alpha/n
    if (alpha_ != 0.0) {
      const double w = alpha_ * inv_n;
      if (f) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
          s += pd.dx(i) * sample_grad_l_(a, i) + pd.dxx(i);
        fsum += w * s;
      }
      if (grad || lap) {
        for (int m = 0; m < d; ++m) {
          double gs = 0.0, ls = 0.0;
          for (int i = 0; i < d; ++i) {
            const double gl = sample_grad_l_(a, i);
            if (grad) gs += pd.dxy(i, m) * gl + pd.dxxy(i, m);
            if (lap) ls += pd.dxyy(i, m) * gl + pd.dxxyy(i, m);
          }
          if (grad) (*grad)(m) += w * gs;
          if (lap) (*lap)(m) += w * ls;
        }
      }
    }
    // first-derivative sections with coefficients beta[a*d+j]
    for (int j = 0; j < d; ++j) {
      const double bj = beta_(a * d + j);
      if (bj == 0.0) continue;
      if (f) fsum += bj * pd.dx(j);
      if (grad)
        for (int m = 0; m < d; ++m) (*grad)(m) += bj * pd.dxy(j, m);
      if (lap)
        for (int m = 0; m < d; ++m) (*lap)(m) += bj * pd.dxyy(j, m);
    }
  }
  if (f) *f = fsum;
}

double FittedModel::eval_f(const Vec& y) const {
  double f = 0.0;
  eval_f_parts(y, &f, nullptr, nullptr);
  return f;
}

Vec FittedModel::eval_grad_f(const Vec& y) const {
  Vec grad(d());
  eval_f_parts(y, nullptr, &grad, nullptr);
  return grad;
}

Vec FittedModel::eval_laplacian_diag_f(const Vec& y) const {
  Vec lap(d());
  eval_f_parts(y, nullptr, nullptr, &lap);
  return lap;
}

double FittedModel::log_unnormalized_density(const Vec& y) const {
  return eval_f(y) + base_.log_density(y);
}

FittedModel make_model(const ScoreSystem& sys, FitMethod method, double alpha,
                       Vec beta) {
  return FittedModel(sys.kernel, sys.base, sys.samples, sys.lambda,
                     std::move(method), alpha, std::move(beta));
}

FittedModel fit_tikhonov(const Mat& samples, const KernelSpec& kernel,
                         const BaseMeasure& base, double lambda, int threads) {
  ScoreSystem sys = assemble(samples, kernel, base, lambda, threads);
  TikhonovSolution sol = solve_tikhonov(sys);
  return make_model(sys, FitMethod::tikhonov(), sol.alpha, std::move(sol.beta));
}

FittedModel fit_clipped(const Mat& samples, const KernelSpec& kernel,
                        const BaseMeasure& base, double lambda, double M,
                        int threads) {
  ScoreSystem sys = assemble(samples, kernel, base, lambda, threads);
  ClippedSolution sol = solve_clipped(sys, M);
  return make_model(sys, FitMethod::clipped(M), sol.alpha, std::move(sol.beta));
}

}  // namespace kexpfam
