#include "kexpfam/solve.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>

#include "kexpfam/errors.hpp"

namespace kexpfam {

namespace {

struct SymSolve {
  Vec x;
  double residual = 0.0;
  int jitter_rounds = 0;
};

double cond_estimate(const Eigen::LDLT<Mat>& ldlt) {
  const Vec dabs = ldlt.vectorD().cwiseAbs();
  const double dmax = dabs.maxCoeff();
  const double dmin = dabs.minCoeff();
  if (dmin <= 0.0) return std::numeric_limits<double>::infinity();
  return dmax / dmin;
}

// Symmetric solve of A x = rhs with diagonal-jitter fallback. The jitter
// delta = 1e-10 trace(A)/m is added cumulatively at most `max_jitter` times;
// each candidate gets one iterative-refinement step before the residual test
// |A x - rhs| <= tol (|A| |x| + |rhs|).
SymSolve solve_sym(const Mat& A, const Vec& rhs, int max_jitter = 3,
                   double tol = 1e-8) {
  const int m = static_cast<int>(A.rows());
  const double a_norm = A.norm();
  const double rhs_norm = rhs.norm();
  const double delta = 1e-10 * A.trace() / m;
  double last_cond = std::numeric_limits<double>::quiet_NaN();

  Mat work = A;
  for (int round = 0; round <= max_jitter; ++round) {
    if (round > 0) work.diagonal().array() += delta;
    Eigen::LDLT<Mat> ldlt(work);
    if (ldlt.info() == Eigen::Success) {
      last_cond = cond_estimate(ldlt);
      Vec x = ldlt.solve(rhs);
      x += ldlt.solve(rhs - work * x);  // one refinement step
      if (x.allFinite()) {
        const double residual = (A * x - rhs).norm();
        if (residual <= tol * (a_norm * x.norm() + rhs_norm))
          return {std::move(x), residual, round};
      }
    }
  }
  throw NumericError(
      "singular linear system after " + std::to_string(max_jitter) +
      " jitter rounds (condition estimate " + std::to_string(last_cond) + ")");
}

}  // namespace

TikhonovSolution solve_tikhonov(const ScoreSystem& sys) {
  if (!(sys.lambda > 0.0) || !std::isfinite(sys.lambda))
    throw ConfigError("solve_tikhonov: lambda must be > 0 and finite");
  const Mat H = sys.H();
  if (!H.allFinite()) throw NumericError("solve_tikhonov: H is not finite");
  const Vec delta = sys.delta();

  SymSolve sol = solve_sym(H, -delta);
  TikhonovSolution out;
  out.alpha = sol.x(0);
  out.beta = sol.x.tail(sys.n * sys.d);
  out.theta = std::move(sol.x);
  out.residual = sol.residual;
  out.jitter_rounds = sol.jitter_rounds;
  return out;
}

ClippedSolution solve_clipped(const ScoreSystem& sys, double M) {
  if (!(M > 0.0) || !std::isfinite(M))
    throw ConfigError("solve_clipped: M must be > 0 and finite");
  const double m2 = M * M;

  const Mat H = sys.H();
  const Vec delta = sys.delta();
  // A zero Gram form cannot produce any nonzero norm, so a nonzero
  // right-hand side makes the constrained problem meaningless.
  if (delta.norm() > 0.0) {
    const double b_scale = std::sqrt(
        sys.xi_norm2 * sys.xi_norm2 + 2.0 * sys.h.squaredNorm() +
        sys.G.squaredNorm());
    if (b_scale <= 1e-14 * std::max(1.0, H.norm()))
      throw NumericError(
          "solve_clipped: B is numerically zero while Delta is not; the "
          "norm constraint cannot be satisfied");
  }

  TikhonovSolution unconstrained = solve_tikhonov(sys);
  const double unconstrained_norm2 = sys.quad_B(unconstrained.theta);

  ClippedSolution out;
  out.beta = unconstrained.beta;
  out.alpha = unconstrained.alpha;
  out.theta = unconstrained.theta;
  out.norm2 = unconstrained_norm2;
  if (unconstrained_norm2 <= m2) {
    out.active = false;
    out.tau = 0.0;
    return out;
  }

  // Constraint binds. Theta(tau) solves (H + 2 tau B) Theta = -Delta and
  // its B-norm decreases monotonically in tau, so bracket then bisect.
  const Mat B = sys.B_matrix();
  auto norm2_at = [&](double tau, Vec* theta_out) {
    Mat A = H + (2.0 * tau) * B;
    Vec theta = solve_sym(A, -delta).x;
    const double q = sys.quad_B(theta);
    if (theta_out) *theta_out = std::move(theta);
    return q;
  };

  double lo = 0.0;
  double hi = 1.0;
  Vec theta;
  double q_hi = norm2_at(hi, &theta);
  int doublings = 0;
  while (q_hi > m2) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200)
      throw NumericError(
          "solve_clipped: multiplier not bracketed after 200 doublings");
    q_hi = norm2_at(hi, &theta);
  }

  // Converge well past the 1e-6 relative contract on the boundary norm so
  // callers checking against that contract see a wide margin, not a value
  // sitting exactly on it.
  const double target = 1e-8 * m2;
  const double contract = 1e-6 * m2;
  double tau = hi;
  double q = q_hi;
  for (int iter = 0; iter < 500 && std::abs(q - m2) > target; ++iter) {
    tau = 0.5 * (lo + hi);
    q = norm2_at(tau, &theta);
    if (q > m2)
      lo = tau;
    else
      hi = tau;
    if (hi - lo <= 1e-15 * hi) break;  // interval exhausted in double precision
  }
  if (std::abs(q - m2) > contract)
    throw NumericError("solve_clipped: bisection did not converge");

  out.alpha = theta(0);
  out.beta = theta.tail(sys.n * sys.d);
  out.theta = std::move(theta);
  out.active = true;
  out.tau = tau;
  out.norm2 = q;
  return out;
}

}  // namespace kexpfam
