#pragma once

#include <string>

#include "kexpfam/fitted_model.hpp"
#include "kexpfam/score_system.hpp"

namespace kexpfam {

enum class FilterKind { Tikhonov, SpectralCutoff, Showalter };

// A spectral regularization filter g_lambda applied to the empirical
// covariance operator:
//   Tikhonov:        g(a) = 1/(a + lambda)
//   SpectralCutoff:  g(a) = 1/a for a >= lambda, else 0
//   Showalter:       g(a) = (1 - exp(-a/lambda))/a, with limit 1/lambda at 0
struct FilterSpec {
  FilterKind kind = FilterKind::Tikhonov;
  double lambda = 1.0;
};

FilterSpec make_filter(FilterKind kind, double lambda);
const char* to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

// g_lambda(alpha_eig); requires alpha_eig >= 0 and lambda > 0.
double filter_value(const FilterSpec& spec, double alpha_eig);

// Applies f = -g_lambda(C_hat) xi_hat through the finite reduction onto
// span{xi_hat} u span{first-derivative sections}:
//
// C_hat maps the section span V into itself and vanishes on V-orthogonal
// directions. On V, both the operator matrix (1/n) G and the representation
// metric G are simultaneously diagonalized by the Euclidean
// eigendecomposition G = sum_l g_l c_l c_l^T (the whitened operator
// G^{-1/2} (1/n) G G^{1/2} equals (1/n) G because the two commute), giving
// operator eigenvalues mu_l = g_l / n. Splitting xi_hat into its V-part and
// remainder and filtering each piece yields
//   alpha = -g(0)
//   beta  = - sum_l (g(mu_l) - g(0)) * (c_l . h / g_l) * c_l
// Eigenvalues below 1e-12 * max are treated as null space.
FittedModel solve_spectral(const ScoreSystem& sys, const FilterSpec& spec);

}  // namespace kexpfam
