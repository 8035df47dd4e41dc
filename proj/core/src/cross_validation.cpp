#include "kexpfam/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "kexpfam/density_model.hpp"
#include "kexpfam/errors.hpp"
#include "kexpfam/kde.hpp"
#include "kexpfam/metrics.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/solve.hpp"
#include "kexpfam/spectral.hpp"

namespace kexpfam {

std::vector<int> fold_assignments(const Mat& samples, int folds,
                                  std::uint64_t seed) {
  const int n = static_cast<int>(samples.rows());
  if (folds < 2) throw ConfigError("cross-validation requires folds >= 2");
  if (n < folds)
    throw ConfigError("cross-validation fold would be empty: n = " +
                      std::to_string(n) + " < folds = " +
                      std::to_string(folds));
  if (!samples.allFinite())
    throw ConfigError("cross-validation samples must be finite");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
      if (samples(a, k) < samples(b, k)) return true;
      if (samples(a, k) > samples(b, k)) return false;
    }
    return a < b;
  });

  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }

  std::vector<int> fold(n);
  for (int pos = 0; pos < n; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

SystemFitter tikhonov_fitter() {
  return [](ScoreSystem& sys, double lambda) {
    sys.set_lambda(lambda);
    TikhonovSolution sol = solve_tikhonov(sys);
    return make_model(sys, FitMethod::tikhonov(), sol.alpha,
                      std::move(sol.beta));
  };
}

SystemFitter clipped_fitter(double M) {
  return [M](ScoreSystem& sys, double lambda) {
    sys.set_lambda(lambda);
    ClippedSolution sol = solve_clipped(sys, M);
    return make_model(sys, FitMethod::clipped(M), sol.alpha,
                      std::move(sol.beta));
  };
}

SystemFitter spectral_fitter(FilterKind kind) {
  return [kind](ScoreSystem& sys, double lambda) {
    return solve_spectral(sys, FilterSpec{kind, lambda});
  };
}

namespace {

struct FoldSplit {
  Mat train;
  Mat val;
};

FoldSplit split_fold(const Mat& samples, const std::vector<int>& fold_of,
                     int fold) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  std::vector<int> train_idx, val_idx;
  for (int a = 0; a < n; ++a)
    (fold_of[a] == fold ? val_idx : train_idx).push_back(a);
  // Emit both matrices in value-lexicographic row order. Together with the
  // canonical fold assignment this makes every fit and held-out score depend
  // only on the sample multiset, never on the caller's row order. Equal keys
  // are identical rows, so no tie-break is needed.
  const auto by_value = [&](int a, int b) {
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
      if (samples(a, k) < samples(b, k)) return true;
      if (samples(a, k) > samples(b, k)) return false;
    }
    return false;
  };
  std::sort(train_idx.begin(), train_idx.end(), by_value);
  std::sort(val_idx.begin(), val_idx.end(), by_value);
  FoldSplit split;
  split.train.resize(static_cast<int>(train_idx.size()), d);
  split.val.resize(static_cast<int>(val_idx.size()), d);
  for (std::size_t t = 0; t < train_idx.size(); ++t)
    split.train.row(static_cast<int>(t)) = samples.row(train_idx[t]);
  for (std::size_t t = 0; t < val_idx.size(); ++t)
    split.val.row(static_cast<int>(t)) = samples.row(val_idx[t]);
  return split;
}

}  // namespace

CvResult cross_validate(const Mat& samples,
                        const std::vector<KernelSpec>& kernel_grid,
                        const std::vector<double>& lambda_grid,
                        const BaseMeasure& base, int folds,
                        std::uint64_t fold_seed, CvCriterion criterion,
                        const SystemFitter& fitter, int threads) {
  if (kernel_grid.empty() || lambda_grid.empty())
    throw ConfigError("cross_validate: empty hyperparameter grid");
  if (criterion != CvCriterion::HeldOutScore)
    throw ConfigError("cross_validate: unsupported criterion");
  for (double lambda : lambda_grid)
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw ConfigError("cross_validate: lambda grid must be positive");
  const std::vector<int> fold_of = fold_assignments(samples, folds, fold_seed);

  const int n_kernels = static_cast<int>(kernel_grid.size());
  const int n_lambdas = static_cast<int>(lambda_grid.size());
  // scores[(k * folds + fold) * n_lambdas + l]
  std::vector<double> scores(
      static_cast<std::size_t>(n_kernels) * folds * n_lambdas, 0.0);

  auto run_cell = [&](int k, int fold) {
    FoldSplit split = split_fold(samples, fold_of, fold);
    ScoreSystem sys =
        assemble(split.train, kernel_grid[k], base, lambda_grid[0]);
    for (int l = 0; l < n_lambdas; ++l) {
      FittedModel model = fitter(sys, lambda_grid[l]);
      const double score =
          score_objective(FittedDensity(std::move(model)), split.val);
      scores[(static_cast<std::size_t>(k) * folds + fold) * n_lambdas + l] =
          score;
    }
  };

  const int n_cells = n_kernels * folds;
  if (threads <= 1 || n_cells <= 1) {
    for (int cell = 0; cell < n_cells; ++cell)
      run_cell(cell / folds, cell % folds);
  } else {
    std::atomic<int> next{0};
    const int workers = std::min(threads, n_cells);
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mu;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int cell = next.fetch_add(1);
          if (cell >= n_cells) return;
          try {
            run_cell(cell / folds, cell % folds);
          } catch (...) {
            std::scoped_lock lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  CvResult result;
  result.table.reserve(static_cast<std::size_t>(n_kernels) * n_lambdas * folds);
  double best = std::numeric_limits<double>::infinity();
  int best_k = 0, best_l = 0;
  for (int k = 0; k < n_kernels; ++k) {
    for (int l = 0; l < n_lambdas; ++l) {
      double mean = 0.0;
      for (int fold = 0; fold < folds; ++fold) {
        const double s =
            scores[(static_cast<std::size_t>(k) * folds + fold) * n_lambdas + l];
        result.table.push_back(CvRow{kernel_grid[k], lambda_grid[l], fold, s});
        mean += s;
      }
      mean /= folds;
      if (mean < best) {  // strict: ties keep the first grid point
        best = mean;
        best_k = k;
        best_l = l;
      }
    }
  }
  result.best_kernel = kernel_grid[best_k];
  result.best_lambda = lambda_grid[best_l];
  result.best_mean_score = best;
  return result;
}

void write_cv_table_csv(std::ostream& out, const CvResult& result) {
  out << "family,sigma,r,c,beta,lambda,fold,heldout_score\n";
  out.precision(17);
  for (const CvRow& row : result.table) {
    out << kernel_family_name(row.kernel.family) << ',' << row.kernel.sigma << ','
        << row.kernel.r << ',' << row.kernel.c << ',' << row.kernel.beta << ','
        << row.lambda << ',' << row.fold << ',' << row.heldout_score << '\n';
  }
}

KdeCvResult select_kde_bandwidth(const Mat& samples,
                                 const std::vector<double>& bandwidth_grid,
                                 int folds, std::uint64_t fold_seed) {
  if (bandwidth_grid.empty())
    throw ConfigError("select_kde_bandwidth: empty bandwidth grid");
  for (double bw : bandwidth_grid)
    if (!(bw > 0.0) || !std::isfinite(bw))
      throw ConfigError("select_kde_bandwidth: bandwidths must be positive");
  const std::vector<int> fold_of = fold_assignments(samples, folds, fold_seed);

  KdeCvResult result;
  double best = std::numeric_limits<double>::infinity();
  for (double bw : bandwidth_grid) {
    double mean = 0.0;
    for (int fold = 0; fold < folds; ++fold) {
      FoldSplit split = split_fold(samples, fold_of, fold);
      const KdeModel kde = kde_fit(split.train, bw);
      auto density = as_density(kde);
      double nll = 0.0;
      for (Eigen::Index t = 0; t < split.val.rows(); ++t)
        nll -= density->log_unnormalized(split.val.row(t).transpose());
      nll /= static_cast<double>(split.val.rows());
      result.table.push_back(KdeCvRow{bw, fold, nll});
      mean += nll;
    }
    mean /= folds;
    if (mean < best) {
      best = mean;
      result.bandwidth = bw;
      result.best_mean_nll = mean;
    }
  }
  return result;
}

std::vector<double> default_bandwidth_grid(const Mat& samples) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  double mean_sd = 0.0;
  for (int k = 0; k < d; ++k) {
    const double mu = samples.col(k).mean();
    const double var =
        (samples.col(k).array() - mu).square().sum() / std::max(1, n - 1);
    mean_sd += std::sqrt(var);
  }
  mean_sd = std::max(mean_sd / d, 1e-3);
  const double scale =
      mean_sd * std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
  return {0.25 * scale, 0.5 * scale, scale, 2.0 * scale, 4.0 * scale};
}

}  // namespace kexpfam
