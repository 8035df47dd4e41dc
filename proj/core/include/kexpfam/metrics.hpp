#pragma once

#include "kexpfam/density_model.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// Empirical score objective of `model` against samples drawn from the
// target:  (1/m) sum_t sum_i [ (1/2) (d log p / dx_i)^2 + d^2 log p / dx_i^2 ]
// evaluated at the rows of eval_samples. Invariant to constant shifts of
// log p; lower is better (equals -d/2 for a standard normal scored by
// itself, in expectation).
double score_objective(const DensityModel& model, const Mat& eval_samples);

// Correlation Cor(p, q) = E[p q] / sqrt(E[p^2] E[q^2]) over the empirical
// measure of ref_samples, computed on unnormalized densities (the ratio is
// invariant to scaling either argument). Clamped to [-1, 1]. Throws
// NumericError when either density is identically zero on the reference set.
double correlation(const DensityModel& model, const DensityModel& truth,
                   const Mat& ref_samples);

// Tensor-product trapezoid grid over an axis-aligned box.
struct QuadGrid {
  Vec lo;
  Vec hi;
  int points_per_axis = 0;  // >= 2
};

struct DivergenceReport {
  double kl = 0.0;         // KL(truth || model), grid-normalized
  double l1 = 0.0;
  double hellinger = 0.0;
  double a_model = 0.0;    // log of the model's normalizer on the grid
};

// Normalizes both densities on the grid by trapezoidal quadrature, then
// computes KL(truth || model), the L1 distance, and the Hellinger distance.
// Restricted to d <= 3 (dimension-cap error above).
DivergenceReport quadrature_divergences(const DensityModel& model,
                                        const DensityModel& truth,
                                        const QuadGrid& grid);

}  // namespace kexpfam
