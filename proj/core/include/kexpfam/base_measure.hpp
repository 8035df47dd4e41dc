#pragma once

#include <functional>
#include <memory>

#include "kexpfam/types.hpp"

namespace kexpfam {

// Reference density q0 with log-density l(x) = log q0(x), its gradient, and
// its diagonal second derivatives. The support is always an open axis-aligned
// box (possibly infinite); membership tests use strict inequalities.
//
// Value type with shared immutable state: copies are cheap and all methods
// are const and thread-safe (Custom callbacks must themselves be).
class BaseMeasure {
 public:
  enum class Family { IsotropicGaussian, UniformBox, Custom };

  struct CustomSpec {
    std::function<double(const Vec&)> log_density;
    std::function<Vec(const Vec&)> grad_log_density;
    std::function<Vec(const Vec&)> laplacian_diag_log_density;
    Vec support_lo;  // open box; +-infinity entries allowed
    Vec support_hi;
  };

  // s is the per-coordinate standard deviation.
  static BaseMeasure isotropic_gaussian(Vec mu, double s);
  // Open box (a, b) with a_j < b_j; density 1/volume inside.
  static BaseMeasure uniform_box(Vec a, Vec b);
  static BaseMeasure custom(CustomSpec spec);

  Family family() const;
  int dim() const;

  // Strict-interior membership; false for non-finite points.
  bool in_support(const Vec& x) const;

  // All three throw ConfigError when x is outside the open support box.
  double log_density(const Vec& x) const;
  Vec grad_log_density(const Vec& x) const;
  Vec laplacian_diag_log_density(const Vec& x) const;

  // Family parameters (for serialization); meaningful per family.
  const Vec& mu() const;
  double s() const;
  const Vec& support_lo() const;
  const Vec& support_hi() const;

 private:
  struct State;
  explicit BaseMeasure(std::shared_ptr<const State> state);
  std::shared_ptr<const State> state_;
};

}  // namespace kexpfam
