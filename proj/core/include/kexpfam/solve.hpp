#pragma once

#include "kexpfam/score_system.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

struct TikhonovSolution {
  double alpha = 0.0;
  Vec beta;
  Vec theta;            // (alpha, beta) stacked
  double residual = 0.0;  // |H theta + Delta|
  int jitter_rounds = 0;  // diagonal-jitter additions needed (0..3)
};

// Solves H Theta = -Delta for the Tikhonov-regularized coefficients.
// Factorization is symmetric LDLT with up to three additions of the
// diagonal jitter 1e-10 * trace(H)/(nd+1); if the residual test
// |H Theta + Delta| <= 1e-8 (|H| |Theta| + |Delta|) still fails, throws
// NumericError carrying a condition estimate.
TikhonovSolution solve_tikhonov(const ScoreSystem& sys);

struct ClippedSolution {
  double alpha = 0.0;
  Vec beta;
  Vec theta;
  bool active = false;   // true when the norm constraint binds
  double tau = 0.0;      // KKT multiplier of the norm constraint
  double norm2 = 0.0;    // Theta^T B Theta at the solution
};

// Norm-clipped variant: minimizes (1/2) Theta^T H Theta + Theta^T Delta
// subject to Theta^T B Theta <= M^2. Solves unconstrained first and returns
// it untouched when feasible; otherwise bisects the multiplier tau in
// (H + 2 tau B) Theta = -Delta until |Theta^T B Theta - M^2| <= 1e-6 M^2.
ClippedSolution solve_clipped(const ScoreSystem& sys, double M);

}  // namespace kexpfam
