#pragma once

#include <memory>

#include "kexpfam/density_model.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// Kernel density estimate with an isotropic Gaussian smoothing kernel:
// p(x) = (1/n) sum_a N(x; X_a, bandwidth^2 I). Normalized by construction.
struct KdeModel {
  Mat samples;       // n x d
  double bandwidth;  // > 0
};

KdeModel kde_fit(const Mat& samples, double bandwidth);

double kde_log_density(const KdeModel& kde, const Vec& x);
Vec kde_grad_log_density(const KdeModel& kde, const Vec& x);
Vec kde_laplacian_diag_log_density(const KdeModel& kde, const Vec& x);

// DensityModel view (normalized log-density).
std::unique_ptr<DensityModel> as_density(const KdeModel& kde);

}  // namespace kexpfam
