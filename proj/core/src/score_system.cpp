#include "kexpfam/score_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "kexpfam/errors.hpp"

namespace kexpfam {

Vec ScoreSystem::delta() const {
  Vec out(size());
  out(0) = xi_norm2;
  out.tail(n * d) = h;
  return out;
}

const Mat& ScoreSystem::Q() const {
  if (!q_cache_) {
    const int nd = n * d;
    auto q = std::make_shared<Mat>(nd + 1, nd + 1);
    Vec gh = G * h;
    (*q)(0, 0) = h.squaredNorm() / n;
    q->row(0).tail(nd) = gh.transpose() / n;
    q->col(0).tail(nd) = gh / n;
    q->bottomRightCorner(nd, nd).noalias() = (G * G) / n;
    q_cache_ = std::move(q);
  }
  return *q_cache_;
}

Mat ScoreSystem::H() const {
  const int nd = n * d;
  Mat out = Q();
  out(0, 0) += lambda * xi_norm2;
  out.row(0).tail(nd) += lambda * h.transpose();
  out.col(0).tail(nd) += lambda * h;
  out.bottomRightCorner(nd, nd) += lambda * G;
  return out;
}

Vec ScoreSystem::B_times(const Vec& theta) const {
  const int nd = n * d;
  Vec out(nd + 1);
  const double alpha = theta(0);
  const auto beta = theta.tail(nd);
  out(0) = xi_norm2 * alpha + h.dot(beta);
  out.tail(nd) = alpha * h;
  out.tail(nd).noalias() += G * beta;
  return out;
}

double ScoreSystem::quad_B(const Vec& theta) const {
  return theta.dot(B_times(theta));
}

Mat ScoreSystem::B_matrix() const {
  const int nd = n * d;
  Mat out(nd + 1, nd + 1);
  out(0, 0) = xi_norm2;
  out.row(0).tail(nd) = h.transpose();
  out.col(0).tail(nd) = h;
  out.bottomRightCorner(nd, nd) = G;
  return out;
}

void ScoreSystem::set_lambda(double new_lambda) {
  if (!(new_lambda > 0.0) || !std::isfinite(new_lambda))
    throw ConfigError("lambda must be > 0 and finite");
  lambda = new_lambda;
}

namespace {

// Fills the G columns, h entries, and the per-sample xi_norm2 partial sums
// for samples b in [b_begin, b_end). Writes are disjoint across b-ranges, and
// each partial depends only on its own sample, so the final reduction order
// (and hence the floating-point result) is independent of how the range is
// split across threads.
void assemble_range(const Mat& samples, const KernelSpec& kernel,
                    const Mat& grad_l, int b_begin, int b_end, Mat& G, Vec& h,
                    Vec& xi_per_sample) {
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  Vec xa(d), xb(d);
  for (int b = b_begin; b < b_end; ++b) {
    xb = samples.row(b).transpose();
    double xi = 0.0;
    for (int a = 0; a < n; ++a) {
      xa = samples.row(a).transpose();
      const PairDerivs pd(kernel, xa, xb);
      for (int j = 0; j < d; ++j) {
        const double glbj = grad_l(b, j);
        double hsum = 0.0;
        for (int i = 0; i < d; ++i) {
          const double dxy = pd.dxy(i, j);
          const double dxxy = pd.dxxy(i, j);
          const double glai = grad_l(a, i);
          G(a * d + i, b * d + j) = dxy;
          hsum += dxxy + dxy * glai;
          xi += pd.dxxyy(i, j) + 2.0 * dxxy * glbj + dxy * glai * glbj;
        }
        h(b * d + j) += hsum;
      }
    }
    xi_per_sample(b) = xi;
  }
}

}  // namespace

ScoreSystem assemble(const Mat& samples, const KernelSpec& kernel,
                     const BaseMeasure& base, double lambda, int threads,
                     int size_cap) {
  validate(kernel);
  const int n = static_cast<int>(samples.rows());
  const int d = static_cast<int>(samples.cols());
  if (n < 1 || d < 1) throw ConfigError("assemble: need n >= 1 and d >= 1");
  if (base.dim() != d)
    throw ConfigError("assemble: base measure dimension mismatch");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ConfigError("assemble: lambda must be > 0 and finite");
  if (static_cast<long long>(n) * d + 1 > size_cap)
    throw ConfigError("assemble: system size n*d+1 = " +
                      std::to_string(static_cast<long long>(n) * d + 1) +
                      " exceeds the size cap " + std::to_string(size_cap));
  if (!samples.allFinite())
    throw ConfigError("assemble: samples contain non-finite values");

  Mat grad_l(n, d);
  for (int a = 0; a < n; ++a) {
    const Vec xa = samples.row(a).transpose();
    if (!base.in_support(xa))
      throw ConfigError("assemble: sample " + std::to_string(a) +
                        " lies outside the base-measure support");
    grad_l.row(a) = base.grad_log_density(xa).transpose();
  }

  ScoreSystem sys;
  sys.n = n;
  sys.d = d;
  sys.lambda = lambda;
  sys.samples = samples;
  sys.kernel = kernel;
  sys.base = base;
  sys.G.setZero(n * d, n * d);
  sys.h.setZero(n * d);

  const int workers = std::max(1, std::min(threads, n));
  Vec xi_per_sample = Vec::Zero(n);
  if (workers == 1) {
    assemble_range(samples, kernel, grad_l, 0, n, sys.G, sys.h, xi_per_sample);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const int b0 = w * chunk;
      const int b1 = std::min(n, b0 + chunk);
      if (b0 >= b1) break;
      pool.emplace_back([&, b0, b1] {
        assemble_range(samples, kernel, grad_l, b0, b1, sys.G, sys.h,
                       xi_per_sample);
      });
    }
    for (auto& t : pool) t.join();
  }
  // Reduce in sample order so the result is identical for every thread count.
  double xi = 0.0;
  for (int b = 0; b < n; ++b) xi += xi_per_sample(b);
  sys.xi_norm2 = xi;

  sys.h /= n;
  sys.xi_norm2 /= static_cast<double>(n) * n;
  // |xi_hat|^2 is nonnegative by construction; trim roundoff when the sum
  // lands epsilon-negative.
  sys.xi_norm2 = std::max(sys.xi_norm2, 0.0);

  if (!sys.G.allFinite() || !sys.h.allFinite() || !std::isfinite(sys.xi_norm2))
    throw NumericError(
        "assemble: non-finite kernel derivative encountered (check kernel "
        "parameters, e.g. sigma)");
  return sys;
}

}  // namespace kexpfam
