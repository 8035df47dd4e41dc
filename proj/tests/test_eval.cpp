#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "kexpfam/base_measure.hpp"
#include "kexpfam/cross_validation.hpp"
#include "kexpfam/density_model.hpp"
#include "kexpfam/errors.hpp"
#include "kexpfam/kde.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/metrics.hpp"
#include "kexpfam/rng.hpp"
#include "kexpfam/targets.hpp"

using namespace kexpfam;

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat normal_samples(std::uint64_t seed, int n, int d, double shift = 0.0) {
  Rng rng(seed);
  Mat samples(n, d);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < d; ++i) samples(a, i) = rng.normal() + shift;
  return samples;
}

GaussianMixtureDensity std_normal_density(int d) {
  return GaussianMixtureDensity(Mat::Zero(1, d), Vec::Ones(1), 1.0);
}

GaussianMixtureDensity shifted_normal_density(int d, double shift) {
  return GaussianMixtureDensity(Mat::Constant(1, d, shift), Vec::Ones(1),
                                1.0);
}

// Adds a constant to another model's log-density (derivatives unchanged).
class ShiftedLogDensity : public DensityModel {
 public:
  ShiftedLogDensity(const DensityModel& inner, double shift)
      : inner_(inner), shift_(shift) {}
  int dim() const override { return inner_.dim(); }
  double log_unnormalized(const Vec& x) const override {
    return inner_.log_unnormalized(x) + shift_;
  }
  Vec grad_log(const Vec& x) const override { return inner_.grad_log(x); }
  Vec laplacian_diag_log(const Vec& x) const override {
    return inner_.laplacian_diag_log(x);
  }

 private:
  const DensityModel& inner_;
  double shift_;
};

class MinusInfinityDensity : public DensityModel {
 public:
  int dim() const override { return 1; }
  double log_unnormalized(const Vec&) const override {
    return -std::numeric_limits<double>::infinity();
  }
  Vec grad_log(const Vec&) const override { return Vec::Zero(1); }
  Vec laplacian_diag_log(const Vec&) const override { return Vec::Zero(1); }
};

QuadGrid grid1d(double lo, double hi, int points) {
  QuadGrid grid;
  grid.lo = Vec::Constant(1, lo);
  grid.hi = Vec::Constant(1, hi);
  grid.points_per_axis = points;
  return grid;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("score objective of the true standard normal is about -d/2") {
  const int m = 100000;
  const GaussianMixtureDensity truth = std_normal_density(1);
  const Mat samples = normal_samples(99, m, 1);
  const double j = score_objective(truth, samples);
  // contribution variance for N(0,1) is Var(x^2/2 - 1) = 1/2
  const double se = std::sqrt(0.5 / m);
  CHECK(std::abs(j + 0.5) < 3.0 * se);
}

TEST_CASE("score objective is exactly shift invariant") {
  const GaussianMixtureDensity truth = std_normal_density(2);
  const ShiftedLogDensity shifted(truth, 12345.678);
  const Mat samples = normal_samples(7, 500, 2);
  CHECK(score_objective(truth, samples) ==
        score_objective(shifted, samples));
}

TEST_CASE("mean-shifting the model strictly increases the score objective") {
  const Mat samples = normal_samples(42, 100000, 1);
  const GaussianMixtureDensity truth = std_normal_density(1);
  const GaussianMixtureDensity shifted = shifted_normal_density(1, 1.0);
  // E[J] = -1/2 for the truth and 0 for the unit shift
  CHECK(score_objective(shifted, samples) >
        score_objective(truth, samples));
}

TEST_CASE("score objective input validation") {
  const GaussianMixtureDensity truth = std_normal_density(2);
  CHECK_THROWS_AS(score_objective(truth, Mat()), ConfigError);
  CHECK_THROWS_AS(score_objective(truth, Mat::Zero(3, 1)), ConfigError);
}

TEST_CASE("correlation: equality, scale invariance, and separation") {
  const GaussianMixtureDensity p = std_normal_density(1);
  const Mat ref = normal_samples(11, 10000, 1);
  CHECK(correlation(p, p, ref) == doctest::Approx(1.0).epsilon(1e-12));

  const ShiftedLogDensity scaled(p, std::log(7.0));  // p -> 7 p
  CHECK(std::abs(correlation(scaled, p, ref) - correlation(p, p, ref)) <=
        1e-12);

  // far-apart gaussians barely overlap on samples from the second one
  const GaussianMixtureDensity q = shifted_normal_density(1, 4.0);
  const Mat ref_q = normal_samples(13, 10000, 1, 4.0);
  const double c = correlation(p, q, ref_q);
  CHECK(c > 0.0);
  CHECK(c < 0.1);
}

TEST_CASE("correlation degenerate cases throw") {
  const GaussianMixtureDensity p = std_normal_density(1);
  const Mat ref = normal_samples(3, 100, 1);
  CHECK_THROWS_AS(correlation(MinusInfinityDensity(), p, ref), NumericError);
  CHECK_THROWS_AS(correlation(p, MinusInfinityDensity(), ref), NumericError);
  CHECK_THROWS_AS(correlation(p, p, Mat()), ConfigError);
}

TEST_CASE("quadrature divergences: identical densities give zero") {
  const GaussianMixtureDensity p = std_normal_density(1);
  const DivergenceReport report =
      quadrature_divergences(p, p, grid1d(-8.0, 8.0, 2001));
  CHECK(std::abs(report.kl) <= 1e-8);
  CHECK(std::abs(report.l1) <= 1e-8);
  CHECK(std::abs(report.hellinger) <= 1e-8);
}

TEST_CASE("quadrature divergences: gaussian closed forms") {
  const GaussianMixtureDensity model = shifted_normal_density(1, 0.5);
  const GaussianMixtureDensity truth = std_normal_density(1);
  const DivergenceReport report =
      quadrature_divergences(model, truth, grid1d(-8.0, 8.0, 2001));
  // KL(N(0,1) || N(0.5,1)) = mu^2 / 2 = 0.125
  CHECK(report.kl == doctest::Approx(0.125).epsilon(1e-3));
  // L1 = 2 (2 Phi(|mu|/2) - 1)
  const double l1_exact = 2.0 * (2.0 * normal_cdf(0.25) - 1.0);
  CHECK(report.l1 == doctest::Approx(l1_exact).epsilon(1e-3));
  // Hellinger = sqrt(1 - exp(-mu^2/8))
  const double h_exact = std::sqrt(1.0 - std::exp(-0.25 / 8.0));
  CHECK(report.hellinger == doctest::Approx(h_exact).epsilon(1e-3));
}

TEST_CASE("quadrature divergences: standard inequalities hold") {
  Rng rng(17);
  const GaussianMixtureDensity truth = std_normal_density(1);
  for (int rep = 0; rep < 5; ++rep) {
    const double shift = 2.0 * rng.uniform() - 1.0;
    Mat means(2, 1);
    means << shift, -shift - 0.3;
    const GaussianMixtureDensity model(means, Vec::Constant(2, 0.5),
                                       0.8 + rng.uniform());
    const DivergenceReport report =
        quadrature_divergences(model, truth, grid1d(-9.0, 9.0, 1501));
    CHECK(report.kl >= 0.0);
    CHECK(report.hellinger * report.hellinger <= report.l1 + 1e-12);
  }
}

TEST_CASE("quadrature divergences: log-sup-norm bound on the KL") {
  // KL(p_f || p_g) <= D^2 e^D (1 + D) with D the sup-norm of the
  // grid-normalized log-density difference.
  const GaussianMixtureDensity f = shifted_normal_density(1, 0.3);
  const GaussianMixtureDensity g = std_normal_density(1);
  const QuadGrid grid = grid1d(-6.0, 6.0, 1201);
  const DivergenceReport fg = quadrature_divergences(g, f, grid);

  // grid-normalized log densities
  const int m = grid.points_per_axis;
  const double dx = (grid.hi(0) - grid.lo(0)) / (m - 1);
  double zf = 0.0, zg = 0.0;
  std::vector<double> lf(m), lg(m);
  for (int k = 0; k < m; ++k) {
    const Vec x = Vec::Constant(1, grid.lo(0) + k * dx);
    lf[k] = f.log_unnormalized(x);
    lg[k] = g.log_unnormalized(x);
    const double w = (k == 0 || k == m - 1) ? 0.5 : 1.0;
    zf += w * dx * std::exp(lf[k]);
    zg += w * dx * std::exp(lg[k]);
  }
  double sup = 0.0;
  for (int k = 0; k < m; ++k)
    sup = std::max(sup, std::abs((lf[k] - std::log(zf)) -
                                 (lg[k] - std::log(zg))));
  CHECK(fg.kl <= sup * sup * std::exp(sup) * (1.0 + sup) + 1e-10);
}

TEST_CASE("quadrature divergences: guard rails") {
  const GaussianMixtureDensity p1 = std_normal_density(1);
  QuadGrid bad = grid1d(2.0, -2.0, 101);
  CHECK_THROWS_AS(quadrature_divergences(p1, p1, bad), ConfigError);
  CHECK_THROWS_AS(quadrature_divergences(p1, p1, grid1d(-1.0, 1.0, 1)),
                  ConfigError);

  const GaussianMixtureDensity p4 = std_normal_density(4);
  QuadGrid grid4;
  grid4.lo = Vec::Constant(4, -2.0);
  grid4.hi = Vec::Constant(4, 2.0);
  grid4.points_per_axis = 5;
  CHECK_THROWS_AS(quadrature_divergences(p4, p4, grid4), ConfigError);

  const GaussianMixtureDensity p3 = std_normal_density(3);
  QuadGrid huge;
  huge.lo = Vec::Constant(3, -2.0);
  huge.hi = Vec::Constant(3, 2.0);
  huge.points_per_axis = 300;  // 2.7e7 nodes
  CHECK_THROWS_AS(quadrature_divergences(p3, p3, huge), ConfigError);
}

TEST_CASE("gaussian mixture density: derivatives and tail stability") {
  Mat means(2, 2);
  means << 1.0, -0.5, -2.0, 0.7;
  Vec weights(2);
  weights << 0.3, 0.7;
  const GaussianMixtureDensity mix(means, weights, 1.3);

  Rng rng(23);
  const double eps = 1e-5;
  for (int rep = 0; rep < 5; ++rep) {
    Vec x(2);
    x << 2.0 * rng.normal(), 2.0 * rng.normal();
    const Vec grad = mix.grad_log(x);
    const Vec lap = mix.laplacian_diag_log(x);
    for (int i = 0; i < 2; ++i) {
      Vec hi = x, lo = x;
      hi(i) += eps;
      lo(i) -= eps;
      const double fd_grad =
          (mix.log_unnormalized(hi) - mix.log_unnormalized(lo)) / (2.0 * eps);
      CHECK(grad(i) == doctest::Approx(fd_grad).epsilon(1e-5));
      const double fd_lap = (mix.log_unnormalized(hi) -
                             2.0 * mix.log_unnormalized(x) +
                             mix.log_unnormalized(lo)) /
                            (eps * eps);
      CHECK(lap(i) == doctest::Approx(fd_lap).epsilon(1e-3));
    }
  }

  const Vec far = Vec::Constant(2, 40.0);
  CHECK(std::isfinite(mix.log_unnormalized(far)));
  CHECK(mix.grad_log(far).allFinite());
  CHECK(mix.laplacian_diag_log(far).allFinite());

  // weights are normalized internally
  const GaussianMixtureDensity unnormalized(means, Vec::Constant(2, 2.0),
                                            1.0);
  const GaussianMixtureDensity normalized(means, Vec::Constant(2, 0.5), 1.0);
  const Vec x0 = Vec::Zero(2);
  CHECK(unnormalized.log_unnormalized(x0) ==
        doctest::Approx(normalized.log_unnormalized(x0)).epsilon(1e-14));
}

TEST_CASE("kde closed forms at a single sample") {
  Mat samples(1, 2);
  samples << 0.5, -0.25;
  const double bw = 0.8;
  const KdeModel kde = kde_fit(samples, bw);
  const Vec at = samples.row(0).transpose();
  CHECK(kde_log_density(kde, at) ==
        doctest::Approx(-std::log(2.0 * kPi * bw * bw)).epsilon(1e-12));
  CHECK(kde_grad_log_density(kde, at).norm() ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("kde derivatives match finite differences") {
  const Mat samples = normal_samples(3, 50, 2);
  const KdeModel kde = kde_fit(samples, 0.5);
  auto density = as_density(kde);
  Rng rng(5);
  const double eps = 1e-5;
  for (int rep = 0; rep < 5; ++rep) {
    Vec x(2);
    x << rng.normal(), rng.normal();
    const Vec grad = density->grad_log(x);
    for (int i = 0; i < 2; ++i) {
      Vec hi = x, lo = x;
      hi(i) += eps;
      lo(i) -= eps;
      const double fd = (density->log_unnormalized(hi) -
                         density->log_unnormalized(lo)) /
                        (2.0 * eps);
      CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("kde with a cross-validated bandwidth scores near the truth") {
  const Mat train = normal_samples(101, 1000, 1);
  const KdeCvResult cv =
      select_kde_bandwidth(train, default_bandwidth_grid(train), 5, 7);
  const KdeModel kde = kde_fit(train, cv.bandwidth);
  const Mat fresh = normal_samples(202, 10000, 1);
  const double j = score_objective(*as_density(kde), fresh);
  CHECK(std::abs(j + 0.5) < 0.2);
}

TEST_CASE("kde input validation") {
  CHECK_THROWS_AS(kde_fit(Mat::Zero(2, 1), 0.0), ConfigError);
  CHECK_THROWS_AS(kde_fit(Mat::Zero(2, 1), -1.0), ConfigError);
  CHECK_THROWS_AS(kde_fit(Mat(), 1.0), ConfigError);
  Mat bad(1, 1);
  bad << std::nan("");
  CHECK_THROWS_AS(kde_fit(bad, 1.0), ConfigError);
}

TEST_CASE("fold assignments are balanced and permutation invariant") {
  const Mat samples = normal_samples(55, 10, 2);
  const std::vector<int> folds = fold_assignments(samples, 3, 99);
  std::vector<int> counts(3, 0);
  for (int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 3);
    counts[f]++;
  }
  std::sort(counts.begin(), counts.end());
  CHECK(counts[0] == 3);
  CHECK(counts[2] == 4);

  // reverse the row order; each point must keep its fold
  Mat reversed(10, 2);
  for (int a = 0; a < 10; ++a) reversed.row(a) = samples.row(9 - a);
  const std::vector<int> folds_rev = fold_assignments(reversed, 3, 99);
  for (int a = 0; a < 10; ++a) CHECK(folds_rev[a] == folds[9 - a]);

  CHECK_THROWS_AS(fold_assignments(samples, 1, 0), ConfigError);
  CHECK_THROWS_AS(fold_assignments(normal_samples(1, 3, 1), 5, 0),
                  ConfigError);
}

TEST_CASE("cross validation returns a single grid point trivially") {
  const Mat samples = normal_samples(301, 40, 1);
  const std::vector<KernelSpec> kernels = {make_gaussian(1.0)};
  const CvResult result = cross_validate(samples, kernels, {0.1},
                                         BaseMeasure::uniform_box(
                                             Vec::Constant(1, -8.0),
                                             Vec::Constant(1, 8.0)),
                                         3, 5);
  CHECK(result.best_lambda == 0.1);
  CHECK(result.table.size() == 3);  // one grid point x three folds
  CHECK(std::isfinite(result.best_mean_score));
}

TEST_CASE("cross validation is invariant to sample order") {
  const Mat samples = normal_samples(77, 30, 1);
  Mat shuffled(30, 1);
  Rng rng(1);
  std::vector<int> perm(30);
  for (int i = 0; i < 30; ++i) perm[i] = i;
  for (int i = 29; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(rng.below(i + 1))]);
  for (int i = 0; i < 30; ++i) shuffled.row(i) = samples.row(perm[i]);

  const std::vector<KernelSpec> kernels = {make_gaussian(0.8),
                                           make_gaussian(1.6)};
  const std::vector<double> lambdas = {0.01, 0.1, 1.0};
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -8.0),
                                                    Vec::Constant(1, 8.0));
  const CvResult a = cross_validate(samples, kernels, lambdas, base, 3, 9);
  const CvResult b = cross_validate(shuffled, kernels, lambdas, base, 3, 9);
  CHECK(a.best_lambda == b.best_lambda);
  CHECK(a.best_kernel.sigma == b.best_kernel.sigma);
  REQUIRE(a.table.size() == b.table.size());
  // split matrices are emitted in canonical row order, so the agreement is
  // exact, not merely approximate
  for (std::size_t i = 0; i < a.table.size(); ++i)
    CHECK(a.table[i].heldout_score == b.table[i].heldout_score);
}

TEST_CASE("cross validation parallel execution matches serial") {
  const Mat samples = normal_samples(31, 36, 1);
  const std::vector<KernelSpec> kernels = {make_gaussian(1.0),
                                           make_gaussian(2.0)};
  const std::vector<double> lambdas = {0.01, 0.1};
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -8.0),
                                                    Vec::Constant(1, 8.0));
  const CvResult serial = cross_validate(samples, kernels, lambdas, base, 3,
                                         4, CvCriterion::HeldOutScore,
                                         tikhonov_fitter(), 1);
  const CvResult parallel = cross_validate(samples, kernels, lambdas, base, 3,
                                           4, CvCriterion::HeldOutScore,
                                           tikhonov_fitter(), 3);
  REQUIRE(serial.table.size() == parallel.table.size());
  for (std::size_t i = 0; i < serial.table.size(); ++i)
    CHECK(serial.table[i].heldout_score == parallel.table[i].heldout_score);
  CHECK(serial.best_lambda == parallel.best_lambda);
}

TEST_CASE("ties break toward the first grid point") {
  const Mat samples = normal_samples(55, 24, 1);
  // identical kernels -> identical scores -> first one wins
  const std::vector<KernelSpec> kernels = {make_gaussian(1.0),
                                           make_gaussian(1.0)};
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -8.0),
                                                    Vec::Constant(1, 8.0));
  const CvResult result =
      cross_validate(samples, kernels, {0.1}, base, 3, 2);
  CHECK(result.table[0].heldout_score ==
        result.table[3].heldout_score);
  CHECK(result.best_kernel.sigma == 1.0);
}

TEST_CASE("selected lambda is interior on well-behaved gaussian data") {
  const std::vector<double> lambdas = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
  const std::vector<KernelSpec> kernels = {
      make_gaussian_poly2(1.0, 0.1, 0.5)};
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -10.0),
                                                    Vec::Constant(1, 10.0));
  int interior = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mat samples = normal_samples(1000 + seed, 200, 1);
    const CvResult result =
        cross_validate(samples, kernels, lambdas, base, 5, seed);
    if (result.best_lambda != lambdas.front() &&
        result.best_lambda != lambdas.back())
      ++interior;
  }
  CHECK(interior >= 8);
}

TEST_CASE("cv score table serialization") {
  const Mat samples = normal_samples(3, 20, 1);
  const BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -8.0),
                                                    Vec::Constant(1, 8.0));
  const CvResult result = cross_validate(samples, {make_gaussian(1.0)},
                                         {0.1, 1.0}, base, 2, 0);
  std::ostringstream out;
  write_cv_table_csv(out, result);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  CHECK(header == "family,sigma,r,c,beta,lambda,fold,heldout_score");
  int lines = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++lines;
  CHECK(lines == 4);  // 1 kernel x 2 lambdas x 2 folds
}

TEST_CASE("kde bandwidth selection structure") {
  const Mat samples = normal_samples(8, 60, 1);
  const std::vector<double> grid = {0.1, 0.3, 0.9};
  const KdeCvResult result = select_kde_bandwidth(samples, grid, 4, 3);
  CHECK(result.table.size() == grid.size() * 4);
  CHECK(std::count(grid.begin(), grid.end(), result.bandwidth) == 1);
  const KdeCvResult again = select_kde_bandwidth(samples, grid, 4, 3);
  CHECK(result.bandwidth == again.bandwidth);
  CHECK_THROWS_AS(select_kde_bandwidth(samples, {}, 4, 3), ConfigError);
  CHECK_THROWS_AS(select_kde_bandwidth(samples, {-1.0}, 4, 3), ConfigError);
}

TEST_CASE("default bandwidth grid scales with the data") {
  const Mat tight = 0.1 * normal_samples(5, 100, 1);
  const Mat wide = 10.0 * normal_samples(5, 100, 1);
  const std::vector<double> g_tight = default_bandwidth_grid(tight);
  const std::vector<double> g_wide = default_bandwidth_grid(wide);
  REQUIRE(g_tight.size() == g_wide.size());
  CHECK(g_tight.size() == 5);
  for (std::size_t i = 0; i < g_tight.size(); ++i) {
    CHECK(g_tight[i] > 0.0);
    CHECK(g_wide[i] == doctest::Approx(100.0 * g_tight[i]).epsilon(1e-9));
  }
}
