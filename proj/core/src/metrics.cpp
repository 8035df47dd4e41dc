#include "kexpfam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kexpfam/errors.hpp"

namespace kexpfam {

double score_objective(const DensityModel& model, const Mat& eval_samples) {
  const int m = static_cast<int>(eval_samples.rows());
  const int d = static_cast<int>(eval_samples.cols());
  if (m < 1 || d < 1) throw ConfigError("score_objective: empty sample matrix");
  if (d != model.dim())
    throw ConfigError("score_objective: model/sample dimension mismatch");

  double total = 0.0;
  Vec x(d), grad(d), lap(d);
  for (int t = 0; t < m; ++t) {
    x = eval_samples.row(t).transpose();
    model.log_parts(x, nullptr, &grad, &lap);
    total += 0.5 * grad.squaredNorm() + lap.sum();
  }
  return total / m;
}

double correlation(const DensityModel& model, const DensityModel& truth,
                   const Mat& ref_samples) {
  const int m = static_cast<int>(ref_samples.rows());
  const int d = static_cast<int>(ref_samples.cols());
  if (m < 1 || d < 1) throw ConfigError("correlation: empty reference sample");
  if (d != model.dim() || d != truth.dim())
    throw ConfigError("correlation: dimension mismatch");

  Vec lp(m), lq(m), x(d);
  for (int t = 0; t < m; ++t) {
    x = ref_samples.row(t).transpose();
    lp(t) = model.log_unnormalized(x);
    lq(t) = truth.log_unnormalized(x);
  }
  // Shift each log-density by its own max before exponentiating; the shifts
  // cancel in the ratio, so this is exact, not an approximation.
  const double mp = lp.maxCoeff();
  const double mq = lq.maxCoeff();
  if (!std::isfinite(mp) || !std::isfinite(mq))
    throw NumericError("correlation: degenerate (all-zero or non-finite) "
                       "density on the reference sample");
  double num = 0.0, pp = 0.0, qq = 0.0;
  for (int t = 0; t < m; ++t) {
    const double sp = std::exp(lp(t) - mp);
    const double sq = std::exp(lq(t) - mq);
    num += sp * sq;
    pp += sp * sp;
    qq += sq * sq;
  }
  const double denom = std::sqrt(pp) * std::sqrt(qq);
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw NumericError("correlation: degenerate denominator");
  return std::clamp(num / denom, -1.0, 1.0);
}

DivergenceReport quadrature_divergences(const DensityModel& model,
                                        const DensityModel& truth,
                                        const QuadGrid& grid) {
  const int d = static_cast<int>(grid.lo.size());
  if (d < 1 || grid.hi.size() != d)
    throw ConfigError("quadrature_divergences: invalid grid box");
  if (d > 3)
    throw ConfigError(
        "quadrature_divergences: dimension cap exceeded (d <= 3 required)");
  if (d != model.dim() || d != truth.dim())
    throw ConfigError("quadrature_divergences: dimension mismatch");
  const int ppa = grid.points_per_axis;
  if (ppa < 2) throw ConfigError("quadrature_divergences: need >= 2 points per axis");
  for (int k = 0; k < d; ++k)
    if (!(grid.lo(k) < grid.hi(k)))
      throw ConfigError("quadrature_divergences: grid requires lo < hi");

  long long total_ll = 1;
  for (int k = 0; k < d; ++k) total_ll *= ppa;
  if (total_ll > 20'000'000)
    throw ConfigError("quadrature_divergences: grid too large");
  const int total = static_cast<int>(total_ll);

  Vec spacing(d);
  for (int k = 0; k < d; ++k) spacing(k) = (grid.hi(k) - grid.lo(k)) / (ppa - 1);

  std::vector<double> lm(total), lt(total), logw(total);
  Vec x(d);
  std::vector<int> idx(d, 0);
  for (int flat = 0; flat < total; ++flat) {
    double lw = 0.0;
    int rem = flat;
    for (int k = d - 1; k >= 0; --k) {
      idx[k] = rem % ppa;
      rem /= ppa;
      x(k) = grid.lo(k) + spacing(k) * idx[k];
      // trapezoid: endpoints carry half weight
      lw += std::log(spacing(k)) +
            ((idx[k] == 0 || idx[k] == ppa - 1) ? std::log(0.5) : 0.0);
    }
    lm[flat] = model.log_unnormalized(x);
    lt[flat] = truth.log_unnormalized(x);
    logw[flat] = lw;
  }

  auto log_normalizer = [&](const std::vector<double>& lv) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < total; ++k) vmax = std::max(vmax, lv[k] + logw[k]);
    if (!std::isfinite(vmax))
      throw NumericError("quadrature_divergences: density vanishes on grid");
    double acc = 0.0;
    for (int k = 0; k < total; ++k) acc += std::exp(lv[k] + logw[k] - vmax);
    return vmax + std::log(acc);
  };

  const double a_model = log_normalizer(lm);
  const double a_truth = log_normalizer(lt);

  // Discrete distributions P_k = w_k p0(x_k), Q_k = w_k p(x_k) after
  // normalization; the grid KL is then a true discrete KL, hence >= 0.
  double kl = 0.0, l1 = 0.0, h2 = 0.0;
  for (int k = 0; k < total; ++k) {
    const double lp0 = lt[k] - a_truth;
    const double lpm = lm[k] - a_model;
    const double w = std::exp(logw[k]);
    const double p0 = std::exp(lp0);
    const double pm = std::exp(lpm);
    if (p0 > 0.0) kl += w * p0 * (lp0 - lpm);
    l1 += w * std::abs(pm - p0);
    const double ds = std::sqrt(pm) - std::sqrt(p0);
    h2 += 0.5 * w * ds * ds;
  }

  DivergenceReport report;
  report.kl = kl;
  report.l1 = l1;
  report.hellinger = std::sqrt(std::max(h2, 0.0));
  report.a_model = a_model;
  return report;
}

}  // namespace kexpfam
