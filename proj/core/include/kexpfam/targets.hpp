#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "kexpfam/density_model.hpp"
#include "kexpfam/types.hpp"

namespace kexpfam {

// Synthetic sampling targets for the experiment harness.
//   StdNormal: N(0, I_d)
//   GaussMix:  (1/2) N(mean_pos * 1_d, I_d) + (1/2) N(mean_neg * 1_d, I_d)
struct TargetSpec {
  enum class Kind { StdNormal, GaussMix };
  Kind kind = Kind::StdNormal;
  double mean_pos = 4.0;
  double mean_neg = -4.0;
};

std::string target_name(const TargetSpec& target);
TargetSpec target_from_name(const std::string& name);

// Seeded i.i.d. draws; identical seeds give bit-identical matrices. The
// mixture draws a fair coin per sample, then the d coordinates.
Mat sample_target(const TargetSpec& target, int n, int d, std::uint64_t seed);

// Analytic truth density with derivatives.
std::unique_ptr<DensityModel> target_density(const TargetSpec& target, int d);

}  // namespace kexpfam
