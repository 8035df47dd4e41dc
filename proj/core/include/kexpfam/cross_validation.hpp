#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kexpfam/base_measure.hpp"
#include "kexpfam/fitted_model.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/score_system.hpp"
#include "kexpfam/spectral.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// Deterministic k-fold assignment. Rows are first put into a canonical order
// (lexicographic sort of the row values), then shuffled with the seeded RNG
// and dealt round-robin. Because the canonical order ignores the input row
// order, permuting the samples with a fixed seed cannot change which points
// share a fold. Returns fold ids indexed by original row.
std::vector<int> fold_assignments(const Mat& samples, int folds,
                                  std::uint64_t seed);

// Fits one model on a training fold for a given lambda. The score system is
// assembled once per (kernel, fold) and reused across the lambda grid (its
// data quadratic term is lambda-independent), so fitters should respect the
// passed system rather than reassembling.
using SystemFitter = std::function<FittedModel(ScoreSystem& sys, double lambda)>;

SystemFitter tikhonov_fitter();
SystemFitter clipped_fitter(double M);
SystemFitter spectral_fitter(FilterKind kind);

// Held-out criterion: the unregularized empirical score objective of the
// fitted density on the validation fold (lower is better).
enum class CvCriterion { HeldOutScore };

struct CvRow {
  KernelSpec kernel;
  double lambda = 0.0;
  int fold = 0;
  double heldout_score = 0.0;
};

struct CvResult {
  KernelSpec best_kernel;
  double best_lambda = 0.0;
  double best_mean_score = 0.0;
  std::vector<CvRow> table;  // ordered (kernel, lambda, fold)
};

// Grid search over kernels x lambdas with k-fold cross-validation. Ties are
// broken toward the first grid point in iteration order (kernels outer,
// lambdas inner). Throws ConfigError when a fold would be empty.
CvResult cross_validate(const Mat& samples,
                        const std::vector<KernelSpec>& kernel_grid,
                        const std::vector<double>& lambda_grid,
                        const BaseMeasure& base, int folds,
                        std::uint64_t fold_seed,
                        CvCriterion criterion = CvCriterion::HeldOutScore,
                        const SystemFitter& fitter = tikhonov_fitter(),
                        int threads = 1);

// CSV score table: kernel parameter columns, lambda, fold, heldout_score.
void write_cv_table_csv(std::ostream& out, const CvResult& result);

struct KdeCvRow {
  double bandwidth = 0.0;
  int fold = 0;
  double heldout_nll = 0.0;
};

struct KdeCvResult {
  double bandwidth = 0.0;
  double best_mean_nll = 0.0;
  std::vector<KdeCvRow> table;
};

// KDE bandwidth selection by k-fold CV of the held-out mean negative
// log-likelihood (the KDE is normalized, so the likelihood is available).
KdeCvResult select_kde_bandwidth(const Mat& samples,
                                 const std::vector<double>& bandwidth_grid,
                                 int folds, std::uint64_t fold_seed);

// Silverman-style default bandwidth grid: the rule-of-thumb scale times
// {1/4, 1/2, 1, 2, 4}.
std::vector<double> default_bandwidth_grid(const Mat& samples);

}  // namespace kexpfam
