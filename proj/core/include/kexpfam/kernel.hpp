#pragma once

#include <cstdint>
#include <string>

#include "kexpfam/types.hpp"

namespace kexpfam {

enum class KernelFamily { Gaussian, GaussianPoly2, InverseMultiquadric };

// A positive-definite kernel family with closed-form partial derivatives.
//
//   Gaussian:             k(x,y) = exp(-|x-y|^2 / (2 sigma^2))
//   GaussianPoly2:        k(x,y) = exp(-|x-y|^2 / (2 sigma^2)) + r (x.y + c)^2
//   InverseMultiquadric:  k(x,y) = (1 + |x-y|^2 / c^2)^(-beta)
//
// Unused parameters are ignored for a given family.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 1.0;  // length-scale (Gaussian families)
  double r = 0.0;      // polynomial weight (GaussianPoly2)
  double c = 0.0;      // polynomial offset (GaussianPoly2) | scale (IMQ)
  double beta = 0.0;   // exponent (IMQ)
};

KernelSpec make_gaussian(double sigma);
KernelSpec make_gaussian_poly2(double sigma, double r, double c);
KernelSpec make_imq(double c, double beta);

// Throws ConfigError when parameters violate the family constraints.
void validate(const KernelSpec& spec);

// Family <-> canonical name ("gaussian", "gaussian_poly2", "imq").
// kernel_family_from_string throws ConfigError for unknown names.
const char* kernel_family_name(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

// The six partial-derivative patterns consumed by the estimator. Each 'x'
// differentiates the first kernel argument (coordinate i), each 'y' the
// second (coordinate j); e.g. Dxxy is d^3 k / dx_i^2 dy_j.
enum class DerivPattern { Dx, Dxx, Dxy, Dxxy, Dxyy, Dxxyy };

// Evaluates all derivative patterns for one point pair at O(1) amortized
// cost per entry: the radial profile derivatives and the polynomial inner
// product are computed once in the constructor.
//
// Holds pointers into x and y; the pair must outlive the evaluator.
class PairDerivs {
 public:
  PairDerivs(const KernelSpec& spec, const Vec& x, const Vec& y);

  double eval() const {
    double v = phi0_;
    if (has_poly_) v += r_ * t_ * t_;
    return v;
  }

  // d k / d x_i
  double dx(int i) const {
    double v = 2.0 * u(i) * phi1_;
    if (has_poly_) v += 2.0 * r_ * t_ * py_[i];
    return v;
  }

  // d^2 k / d x_i^2
  double dxx(int i) const {
    const double ui = u(i);
    double v = 2.0 * phi1_ + 4.0 * ui * ui * phi2_;
    if (has_poly_) v += 2.0 * r_ * py_[i] * py_[i];
    return v;
  }

  // d^2 k / d x_i d y_j
  double dxy(int i, int j) const {
    const double ui = u(i), uj = u(j);
    double v = -4.0 * ui * uj * phi2_;
    if (i == j) v -= 2.0 * phi1_;
    if (has_poly_) {
      v += 2.0 * r_ * py_[i] * px_[j];
      if (i == j) v += 2.0 * r_ * t_;
    }
    return v;
  }

  // d^3 k / d x_i^2 d y_j
  double dxxy(int i, int j) const {
    const double ui = u(i), uj = u(j);
    double v = -4.0 * uj * phi2_ - 8.0 * ui * ui * uj * phi3_;
    if (i == j) v -= 8.0 * ui * phi2_;
    if (has_poly_ && i == j) v += 4.0 * r_ * py_[i];
    return v;
  }

  // d^3 k / d x_i d y_j^2
  double dxyy(int i, int j) const {
    const double ui = u(i), uj = u(j);
    double v = 4.0 * ui * phi2_ + 8.0 * ui * uj * uj * phi3_;
    if (i == j) v += 8.0 * uj * phi2_;
    if (has_poly_ && i == j) v += 4.0 * r_ * px_[j];
    return v;
  }

  // d^4 k / d x_i^2 d y_j^2
  double dxxyy(int i, int j) const {
    const double ui = u(i), uj = u(j);
    const double ui2 = ui * ui, uj2 = uj * uj;
    double v = 4.0 * phi2_ + 8.0 * (ui2 + uj2) * phi3_ + 16.0 * ui2 * uj2 * phi4_;
    if (i == j) v += 8.0 * phi2_ + 32.0 * ui * uj * phi3_;
    if (has_poly_ && i == j) v += 4.0 * r_;
    return v;
  }

 private:
  double u(int i) const { return px_[i] - py_[i]; }

  const double* px_;
  const double* py_;
  // Radial profile phi and its first four derivatives, evaluated at
  // rho = |x-y|^2 (the kernel's radial part is k_rad(x,y) = phi(rho)).
  double phi0_, phi1_, phi2_, phi3_, phi4_;
  bool has_poly_ = false;
  double r_ = 0.0;  // polynomial weight
  double t_ = 0.0;  // x.y + c
};

// Scalar convenience API. kernel_eval validates that inputs are finite.
double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y);
double kernel_deriv(const KernelSpec& spec, DerivPattern pattern, int i, int j,
                    const Vec& x, const Vec& y);

// Finite-difference validation of the analytic derivatives at one point
// pair. Each pattern is checked against a central difference of the
// next-lower-order analytic derivative (differencing an analytic quantity
// keeps the roundoff level of a first-order stencil for every pattern).
// Relative error uses the guarded denominator 1 + |analytic|.
struct FiniteDiffReport {
  double max_rel_error = 0.0;
  DerivPattern worst_pattern = DerivPattern::Dx;
  int worst_i = 0;
  int worst_j = 0;
};

// step must lie in [1e-6, 1e-2].
FiniteDiffReport finite_diff_check(const KernelSpec& spec, const Vec& x,
                                   const Vec& y, double step);

// Worst report over `n_pairs` seeded random pairs in [-box, box]^d; every
// tenth pair is coincident (y = x) to exercise the diagonal terms.
FiniteDiffReport finite_diff_check_suite(const KernelSpec& spec, int d,
                                         int n_pairs, double step,
                                         std::uint64_t seed,
                                         double box_halfwidth = 3.0);

const char* to_string(DerivPattern pattern);

}  // namespace kexpfam
