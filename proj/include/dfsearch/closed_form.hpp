#pragma once

#include "dfsearch/model.hpp"

namespace dfsearch {

/// One point on a df / sdf curve for a thresholding-type procedure on an
/// orthogonal design. df == expected_active + sdf.
struct CurvePoint {
  double lambda = 0.0;
  double t = 0.0;  // sqrt(2*lambda) for best subset, lambda for the (relaxed) lasso
  double expected_active = 0.0;
  double df = 0.0;
  double sdf = 0.0;
};

double normal_pdf(double x);
double normal_cdf(double x);

/// Moments of z ~ N(0, sigma^2) restricted to a tail.
struct TruncatedMoments {
  double first_below;   // E[z 1{z <= a}]
  double first_above;   // E[z 1{z >= b}]
  double second_below;  // E[z^2 1{z <= a}]
  double second_above;  // E[z^2 1{z >= b}]
};

TruncatedMoments truncated_moments(double a, double b, double sigma);

/// E|A_t| for hard thresholding y ~ N(mu, sigma^2 I) at level t.
double expected_active_hard(const Vector& mu, double sigma, double t);

/// The search term (t/sigma) * sum_i [phi((t - mu_i)/sigma) + phi((t + mu_i)/sigma)].
double search_term_hard(const Vector& mu, double sigma, double t);

/// df(H_t) = E|A_t| + search term.
double df_hard_threshold(const Vector& mu, double sigma, double t);

/// Best subset on an orthogonal design, threshold t = sqrt(2*lambda).
CurvePoint df_subset_orthogonal(const Vector& xtmu, double sigma, double lambda);

/// Relaxed lasso (and the lasso's search term) on an orthogonal design, t = lambda.
CurvePoint df_relaxed_lasso_orthogonal(const Vector& xtmu, double sigma, double lambda);

/// Search degrees of freedom of best subset with mu = 0:
/// 2p * sqrt(2 lambda)/sigma * phi(sqrt(2 lambda)/sigma).
double sdf_null(int p, double sigma, double lambda);

/// Sparse-signal form: the active coordinates contribute their pair of
/// densities, the p - k* null coordinates 2*phi each.
double sdf_sparse(const Vector& beta_star, double sigma, double lambda);

/// Dense-signal form: every coordinate contributes its pair of densities.
double sdf_dense(const Vector& beta_star, double sigma, double lambda);

/// Threshold t >= 0 at which E|A_t| equals `target`, by bisection until the
/// expected size is within `tolerance`. Requires 0 < target < p.
double threshold_for_expected_active(const Vector& mu, double sigma, double target,
                                     double tolerance = 1e-10);

inline double subset_lambda_for_threshold(double t) { return 0.5 * t * t; }
inline double lasso_lambda_for_threshold(double t) { return t; }

}  // namespace dfsearch
