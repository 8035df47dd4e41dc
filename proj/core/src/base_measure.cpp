#include "kexpfam/base_measure.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "kexpfam/errors.hpp"

namespace kexpfam {

static constexpr double kInf = std::numeric_limits<double>::infinity();

struct BaseMeasure::State {
  Family family = Family::UniformBox;
  int d = 0;
  Vec mu;          // IsotropicGaussian
  double s = 1.0;  // IsotropicGaussian standard deviation
  Vec lo, hi;      // open support box
  double log_norm = 0.0;
  CustomSpec custom;
};

BaseMeasure::BaseMeasure(std::shared_ptr<const State> state)
    : state_(std::move(state)) {}

BaseMeasure BaseMeasure::isotropic_gaussian(Vec mu, double s) {
  if (mu.size() == 0) throw ConfigError("isotropic_gaussian: empty mean");
  if (!mu.allFinite()) throw ConfigError("isotropic_gaussian: non-finite mean");
  if (!(s > 0.0) || !std::isfinite(s))
    throw ConfigError("isotropic_gaussian: s must be > 0");
  auto state = std::make_shared<State>();
  state->family = Family::IsotropicGaussian;
  state->d = static_cast<int>(mu.size());
  state->mu = std::move(mu);
  state->s = s;
  state->lo = Vec::Constant(state->d, -kInf);
  state->hi = Vec::Constant(state->d, kInf);
  state->log_norm =
      -0.5 * state->d * std::log(2.0 * std::numbers::pi * s * s);
  return BaseMeasure(std::move(state));
}

BaseMeasure BaseMeasure::uniform_box(Vec a, Vec b) {
  if (a.size() == 0 || a.size() != b.size())
    throw ConfigError("uniform_box: bounds must be nonempty and equal-sized");
  if (!a.allFinite() || !b.allFinite())
    throw ConfigError("uniform_box: bounds must be finite");
  for (Eigen::Index j = 0; j < a.size(); ++j)
    if (!(a(j) < b(j)))
      throw ConfigError("uniform_box: requires a_j < b_j in every coordinate");
  auto state = std::make_shared<State>();
  state->family = Family::UniformBox;
  state->d = static_cast<int>(a.size());
  state->lo = std::move(a);
  state->hi = std::move(b);
  state->log_norm = -(state->hi - state->lo).array().log().sum();
  return BaseMeasure(std::move(state));
}

BaseMeasure BaseMeasure::custom(CustomSpec spec) {
  if (!spec.log_density || !spec.grad_log_density ||
      !spec.laplacian_diag_log_density)
    throw ConfigError("custom base measure: all three callbacks are required");
  if (spec.support_lo.size() == 0 ||
      spec.support_lo.size() != spec.support_hi.size())
    throw ConfigError("custom base measure: invalid support box");
  auto state = std::make_shared<State>();
  state->family = Family::Custom;
  state->d = static_cast<int>(spec.support_lo.size());
  state->lo = spec.support_lo;
  state->hi = spec.support_hi;
  state->custom = std::move(spec);
  return BaseMeasure(std::move(state));
}

BaseMeasure::Family BaseMeasure::family() const { return state_->family; }
int BaseMeasure::dim() const { return state_->d; }
const Vec& BaseMeasure::mu() const { return state_->mu; }
double BaseMeasure::s() const { return state_->s; }
const Vec& BaseMeasure::support_lo() const { return state_->lo; }
const Vec& BaseMeasure::support_hi() const { return state_->hi; }

bool BaseMeasure::in_support(const Vec& x) const {
  if (x.size() != state_->d) return false;
  for (int j = 0; j < state_->d; ++j) {
    // NaN fails both comparisons, so non-finite points are rejected.
    if (!(x(j) > state_->lo(j) && x(j) < state_->hi(j))) return false;
  }
  return true;
}

namespace {
[[noreturn]] void throw_out_of_support() {
  throw ConfigError("point outside the open support of the base measure");
}
}  // namespace

double BaseMeasure::log_density(const Vec& x) const {
  if (!in_support(x)) throw_out_of_support();
  switch (state_->family) {
    case Family::IsotropicGaussian:
      return state_->log_norm -
             (x - state_->mu).squaredNorm() / (2.0 * state_->s * state_->s);
    case Family::UniformBox:
      return state_->log_norm;
    case Family::Custom:
      return state_->custom.log_density(x);
  }
  throw ConfigError("unknown base-measure family");
}

Vec BaseMeasure::grad_log_density(const Vec& x) const {
  if (!in_support(x)) throw_out_of_support();
  switch (state_->family) {
    case Family::IsotropicGaussian:
      return (state_->mu - x) / (state_->s * state_->s);
    case Family::UniformBox:
      return Vec::Zero(state_->d);
    case Family::Custom:
      return state_->custom.grad_log_density(x);
  }
  throw ConfigError("unknown base-measure family");
}

Vec BaseMeasure::laplacian_diag_log_density(const Vec& x) const {
  if (!in_support(x)) throw_out_of_support();
  switch (state_->family) {
    case Family::IsotropicGaussian:
      return Vec::Constant(state_->d, -1.0 / (state_->s * state_->s));
    case Family::UniformBox:
      return Vec::Zero(state_->d);
    case Family::Custom:
      return state_->custom.laplacian_diag_log_density(x);
  }
  throw ConfigError("unknown base-measure family");
}

}  // namespace kexpfam
