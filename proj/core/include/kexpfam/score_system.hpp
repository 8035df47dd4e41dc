#pragma once

#include <memory>

#include "kexpfam/base_measure.hpp"
#include "kexpfam/kernel.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// The assembled empirical score-matching system in the representer basis
// {xi_hat} u {d k(.,X_b)/dx_j}. Writing phi_bj for the first-derivative
// kernel sections and l = log q0:
//
//   G[(a,i),(b,j)] = d^2 k(X_a,X_b) / dx_i dy_j          (Gram of the phi's)
//   h[(b,j)]       = (1/n) sum_{a,i} [ d^3 k(X_a,X_b)/dx_i^2 dy_j
//                      + d^2 k(X_a,X_b)/dx_i dy_j * dl(X_a)/dx_i ]
//   xi_norm2       = |xi_hat|^2 (double sum over pairs, see assemble())
//
// The fitted coefficients Theta = (alpha, beta) live in R^(nd+1) with alpha
// at index 0 and beta flattened as b*d + j. The quadratic form uses
//   B = [[xi_norm2, h^T], [h, G]]            (Gram of the basis)
//   Q = (1/n) [h G]^T [h G]                  (data quadratic term)
//   H = Q + lambda B,   Delta = (xi_norm2, h)
// and the Tikhonov estimate solves H Theta = -Delta.
struct ScoreSystem {
  int n = 0;
  int d = 0;
  double lambda = 0.0;
  Mat G;             // nd x nd
  Vec h;             // nd
  double xi_norm2 = 0.0;

  // Provenance, carried along so solvers can build evaluable models.
  Mat samples;       // n x d
  KernelSpec kernel;
  BaseMeasure base = BaseMeasure::uniform_box(Vec::Constant(1, -1.0),
                                              Vec::Constant(1, 1.0));

  int size() const { return n * d + 1; }

  // Right-hand-side vector (xi_norm2, h).
  Vec delta() const;

  // Data quadratic term; computed once and cached (lambda-independent, so a
  // lambda sweep over the same system factors H = Q + lambda B cheaply).
  const Mat& Q() const;

  // H = Q + lambda * B, using the current lambda.
  Mat H() const;

  // B products without materializing B.
  Vec B_times(const Vec& theta) const;
  double quad_B(const Vec& theta) const;  // theta^T B theta
  Mat B_matrix() const;                   // materialized (clipped solver only)

  void set_lambda(double lambda);

 private:
  mutable std::shared_ptr<const Mat> q_cache_;
};

// Builds the system from samples. Throws ConfigError for invalid inputs
// (empty data, lambda <= 0, samples outside the base support, size cap) and
// NumericError when kernel derivatives come out non-finite.
ScoreSystem assemble(const Mat& samples, const KernelSpec& kernel,
                     const BaseMeasure& base, double lambda, int threads = 1,
                     int size_cap = 20001);

}  // namespace kexpfam
