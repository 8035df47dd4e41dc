#include "kexpfam/kernel.hpp"

#include <cmath>
#include <string>

#include "kexpfam/errors.hpp"
#include "kexpfam/rng.hpp"

namespace kexpfam {

KernelSpec make_gaussian(double sigma) {
  KernelSpec spec;
  spec.family = KernelFamily::Gaussian;
  spec.sigma = sigma;
  return spec;
}

KernelSpec make_gaussian_poly2(double sigma, double r, double c) {
  KernelSpec spec;
  spec.family = KernelFamily::GaussianPoly2;
  spec.sigma = sigma;
  spec.r = r;
  spec.c = c;
  return spec;
}

KernelSpec make_imq(double c, double beta) {
  KernelSpec spec;
  spec.family = KernelFamily::InverseMultiquadric;
  spec.c = c;
  spec.beta = beta;
  return spec;
}

void validate(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Gaussian:
      if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
        throw ConfigError("gaussian kernel requires sigma > 0");
      return;
    case KernelFamily::GaussianPoly2:
      if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma))
        throw ConfigError("gaussian_poly2 kernel requires sigma > 0");
      if (!(spec.r >= 0.0) || !std::isfinite(spec.r))
        throw ConfigError("gaussian_poly2 kernel requires r >= 0");
      if (!std::isfinite(spec.c))
        throw ConfigError("gaussian_poly2 kernel requires finite c");
      return;
    case KernelFamily::InverseMultiquadric:
      if (!(spec.c > 0.0) || !std::isfinite(spec.c))
        throw ConfigError("imq kernel requires c > 0");
      if (!(spec.beta > 0.0) || !std::isfinite(spec.beta))
        throw ConfigError("imq kernel requires beta > 0");
      return;
  }
  throw ConfigError("unknown kernel family");
}

const char* kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::GaussianPoly2:
      return "gaussian_poly2";
    case KernelFamily::InverseMultiquadric:
      return "imq";
  }
  throw ConfigError("unknown kernel family");
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "gaussian_poly2") return KernelFamily::GaussianPoly2;
  if (name == "imq") return KernelFamily::InverseMultiquadric;
  throw ConfigError("unknown kernel family \"" + name +
                    "\" (expected gaussian, gaussian_poly2, or imq)");
}

PairDerivs::PairDerivs(const KernelSpec& spec, const Vec& x, const Vec& y)
    : px_(x.data()), py_(y.data()) {
  const int d = static_cast<int>(x.size());
  double rho = 0.0;
  for (int i = 0; i < d; ++i) {
    const double ui = px_[i] - py_[i];
    rho += ui * ui;
  }
  switch (spec.family) {
    case KernelFamily::Gaussian:
    case KernelFamily::GaussianPoly2: {
      // phi(rho) = exp(g rho) with g = -1/(2 sigma^2); phi^(m) = g^m phi.
      const double g = -0.5 / (spec.sigma * spec.sigma);
      phi0_ = std::exp(g * rho);
      phi1_ = g * phi0_;
      phi2_ = g * phi1_;
      phi3_ = g * phi2_;
      phi4_ = g * phi3_;
      if (spec.family == KernelFamily::GaussianPoly2) {
        has_poly_ = true;
        r_ = spec.r;
        double dot = 0.0;
        for (int i = 0; i < d; ++i) dot += px_[i] * py_[i];
        t_ = dot + spec.c;
      }
      break;
    }
    case KernelFamily::InverseMultiquadric: {
      // phi(rho) = base^(-beta) with base = 1 + rho/c^2;
      // phi^(m) = (-1)^m beta (beta+1) ... (beta+m-1) c^(-2m) base^(-beta-m).
      const double inv_c2 = 1.0 / (spec.c * spec.c);
      const double base = 1.0 + rho * inv_c2;
      const double b = spec.beta;
      const double pm4 = std::pow(base, -b - 4.0);
      phi4_ = b * (b + 1.0) * (b + 2.0) * (b + 3.0) * inv_c2 * inv_c2 *
              inv_c2 * inv_c2 * pm4;
      phi3_ = -b * (b + 1.0) * (b + 2.0) * inv_c2 * inv_c2 * inv_c2 * pm4 * base;
      phi2_ = b * (b + 1.0) * inv_c2 * inv_c2 * pm4 * base * base;
      phi1_ = -b * inv_c2 * pm4 * base * base * base;
      phi0_ = pm4 * base * base * base * base;
      break;
    }
    default:
      throw ConfigError("unknown kernel family");
  }
}

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y) {
  validate(spec);
  if (x.size() != y.size() || x.size() == 0)
    throw ConfigError("kernel_eval: mismatched or empty points");
  if (!x.allFinite() || !y.allFinite())
    throw ConfigError("kernel_eval: non-finite input point");
  return PairDerivs(spec, x, y).eval();
}

double kernel_deriv(const KernelSpec& spec, DerivPattern pattern, int i, int j,
                    const Vec& x, const Vec& y) {
  validate(spec);
  const int d = static_cast<int>(x.size());
  if (x.size() != y.size() || d == 0)
    throw ConfigError("kernel_deriv: mismatched or empty points");
  if (!x.allFinite() || !y.allFinite())
    throw ConfigError("kernel_deriv: non-finite input point");
  if (i < 0 || i >= d || j < 0 || j >= d)
    throw ConfigError("kernel_deriv: coordinate index out of range");
  PairDerivs pd(spec, x, y);
  switch (pattern) {
    case DerivPattern::Dx:
      return pd.dx(i);
    case DerivPattern::Dxx:
      return pd.dxx(i);
    case DerivPattern::Dxy:
      return pd.dxy(i, j);
    case DerivPattern::Dxxy:
      return pd.dxxy(i, j);
    case DerivPattern::Dxyy:
      return pd.dxyy(i, j);
    case DerivPattern::Dxxyy:
      return pd.dxxyy(i, j);
  }
  throw ConfigError("kernel_deriv: unsupported derivative pattern");
}

const char* to_string(DerivPattern pattern) {
  switch (pattern) {
    case DerivPattern::Dx:
      return "dx";
    case DerivPattern::Dxx:
      return "dxx";
    case DerivPattern::Dxy:
      return "dxy";
    case DerivPattern::Dxxy:
      return "dxxy";
    case DerivPattern::Dxyy:
      return "dxyy";
    case DerivPattern::Dxxyy:
      return "dxxyy";
  }
  return "?";
}

namespace {

void track(FiniteDiffReport& report, double analytic, double fd,
           DerivPattern pattern, int i, int j) {
  const double rel = std::abs(analytic - fd) / (1.0 + std::abs(analytic));
  if (rel > report.max_rel_error) {
    report.max_rel_error = rel;
    report.worst_pattern = pattern;
    report.worst_i = i;
    report.worst_j = j;
  }
}

}  // namespace

FiniteDiffReport finite_diff_check(const KernelSpec& spec, const Vec& x,
                                   const Vec& y, double step) {
  validate(spec);
  if (!(step >= 1e-6 && step <= 1e-2))
    throw ConfigError("finite_diff_check: step must lie in [1e-6, 1e-2]");
  if (x.size() != y.size() || x.size() == 0)
    throw ConfigError("finite_diff_check: mismatched or empty points");
  const int d = static_cast<int>(x.size());
  const double inv2h = 0.5 / step;

  FiniteDiffReport report;
  Vec xp = x, xm = x, yp = y, ym = y;
  for (int i = 0; i < d; ++i) {
    xp(i) = x(i) + step;
    xm(i) = x(i) - step;
    PairDerivs at(spec, x, y), atxp(spec, xp, y), atxm(spec, xm, y);

    // first and second x-derivatives, differenced in x_i
    track(report, at.dx(i), (atxp.eval() - atxm.eval()) * inv2h,
          DerivPattern::Dx, i, i);
    track(report, at.dxx(i), (atxp.dx(i) - atxm.dx(i)) * inv2h,
          DerivPattern::Dxx, i, i);

    for (int j = 0; j < d; ++j) {
      yp(j) = y(j) + step;
      ym(j) = y(j) - step;
      PairDerivs atyp(spec, x, yp), atym(spec, x, ym);
      // mixed patterns, differenced in y_j
      track(report, at.dxy(i, j), (atyp.dx(i) - atym.dx(i)) * inv2h,
            DerivPattern::Dxy, i, j);
      track(report, at.dxxy(i, j), (atyp.dxx(i) - atym.dxx(i)) * inv2h,
            DerivPattern::Dxxy, i, j);
      track(report, at.dxyy(i, j), (atyp.dxy(i, j) - atym.dxy(i, j)) * inv2h,
            DerivPattern::Dxyy, i, j);
      track(report, at.dxxyy(i, j), (atyp.dxxy(i, j) - atym.dxxy(i, j)) * inv2h,
            DerivPattern::Dxxyy, i, j);
      yp(j) = y(j);
      ym(j) = y(j);
    }
    xp(i) = x(i);
    xm(i) = x(i);
  }
  return report;
}

FiniteDiffReport finite_diff_check_suite(const KernelSpec& spec, int d,
                                         int n_pairs, double step,
                                         std::uint64_t seed,
                                         double box_halfwidth) {
  if (d < 1) throw ConfigError("finite_diff_check_suite: d must be >= 1");
  if (n_pairs < 1) throw ConfigError("finite_diff_check_suite: n_pairs must be >= 1");
  Rng rng(seed);
  FiniteDiffReport worst;
  Vec x(d), y(d);
  for (int pair = 0; pair < n_pairs; ++pair) {
    for (int i = 0; i < d; ++i)
      x(i) = box_halfwidth * (2.0 * rng.uniform() - 1.0);
    if (pair % 10 == 9) {
      y = x;  // coincident pair: exercises the i==j diagonal terms
    } else {
      for (int i = 0; i < d; ++i)
        y(i) = box_halfwidth * (2.0 * rng.uniform() - 1.0);
    }
    FiniteDiffReport report = finite_diff_check(spec, x, y, step);
    if (report.max_rel_error > worst.max_rel_error) worst = report;
  }
  return worst;
}

}  // namespace kexpfam
