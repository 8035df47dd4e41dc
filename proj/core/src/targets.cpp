#include "kexpfam/targets.hpp"

#include "kexpfam/errors.hpp"
#include "kexpfam/rng.hpp"

namespace kexpfam {

std::string target_name(const TargetSpec& target) {
  switch (target.kind) {
    case TargetSpec::Kind::StdNormal:
      return "stdnormal";
    case TargetSpec::Kind::GaussMix:
      return "gauss_mix";
  }
  return "?";
}

TargetSpec target_from_name(const std::string& name) {
  TargetSpec target;
  if (name == "stdnormal") {
    target.kind = TargetSpec::Kind::StdNormal;
    return target;
  }
  if (name == "gauss_mix") {
    target.kind = TargetSpec::Kind::GaussMix;
    return target;
  }
  throw ConfigError("unknown target '" + name +
                    "' (expected stdnormal|gauss_mix)");
}

Mat sample_target(const TargetSpec& target, int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConfigError("sample_target: need n >= 1, d >= 1");
  Rng rng(seed);
  Mat samples(n, d);
  switch (target.kind) {
    case TargetSpec::Kind::StdNormal:
      for (int a = 0; a < n; ++a)
        for (int k = 0; k < d; ++k) samples(a, k) = rng.normal();
      break;
    case TargetSpec::Kind::GaussMix:
      for (int a = 0; a < n; ++a) {
        const double mean =
            rng.uniform() < 0.5 ? target.mean_pos : target.mean_neg;
        for (int k = 0; k < d; ++k) samples(a, k) = mean + rng.normal();
      }
      break;
  }
  return samples;
}

std::unique_ptr<DensityModel> target_density(const TargetSpec& target, int d) {
  if (d < 1) throw ConfigError("target_density: need d >= 1");
  switch (target.kind) {
    case TargetSpec::Kind::StdNormal: {
      Mat means = Mat::Zero(1, d);
      return std::make_unique<GaussianMixtureDensity>(
          std::move(means), Vec::Constant(1, 1.0), 1.0);
    }
    case TargetSpec::Kind::GaussMix: {
      Mat means(2, d);
      means.row(0).setConstant(target.mean_pos);
      means.row(1).setConstant(target.mean_neg);
      return std::make_unique<GaussianMixtureDensity>(
          std::move(means), Vec::Constant(2, 0.5), 1.0);
    }
  }
  throw ConfigError("unknown target kind");
}

}  // namespace kexpfam
