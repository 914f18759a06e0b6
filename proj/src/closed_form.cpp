#include "dfsearch/closed_form.hpp"

#include "dfsearch/errors.hpp"

#include <cmath>
#include <numbers>

namespace dfsearch {

namespace {

void check_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be positive");
}

void check_threshold(double t) {
  if (!(t >= 0.0)) throw ArgumentError("threshold must be nonnegative");
}

CurvePoint curve_point(const Vector& xtmu, double sigma, double lambda, double t) {
  CurvePoint pt;
  pt.lambda = lambda;
  pt.t = t;
  pt.expected_active = expected_active_hard(xtmu, sigma, t);
  pt.sdf = search_term_hard(xtmu, sigma, t);
  pt.df = pt.expected_active + pt.sdf;
  return pt;
}

}  // namespace

double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

TruncatedMoments truncated_moments(double a, double b, double sigma) {
  check_sigma(sigma);
  TruncatedMoments m{};
  const double s2 = sigma * sigma;
  // Written so that infinite a or b give the limiting values.
  const double pa = normal_pdf(a / sigma);
  const double pb = normal_pdf(b / sigma);
  m.first_below = -sigma * pa;
  m.first_above = sigma * pb;
  m.second_below = (std::isinf(a) ? 0.0 : -sigma * a * pa) + s2 * normal_cdf(a / sigma);
  m.second_above = (std::isinf(b) ? 0.0 : sigma * b * pb) + s2 * normal_cdf(-b / sigma);
  return m;
}

double expected_active_hard(const Vector& mu, double sigma, double t) {
  check_sigma(sigma);
  check_threshold(t);
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    // 1 - Phi((t - mu)/sigma) + Phi((-t - mu)/sigma), using the upper tail
    // form to keep precision for large thresholds.
    total += normal_cdf((mu[i] - t) / sigma) + normal_cdf((-t - mu[i]) / sigma);
  }
  return total;
}

double search_term_hard(const Vector& mu, double sigma, double t) {
  check_sigma(sigma);
  check_threshold(t);
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    total += normal_pdf((t - mu[i]) / sigma) + normal_pdf((t + mu[i]) / sigma);
  }
  return t / sigma * total;
}

double df_hard_threshold(const Vector& mu, double sigma, double t) {
  return expected_active_hard(mu, sigma, t) + search_term_hard(mu, sigma, t);
}

CurvePoint df_subset_orthogonal(const Vector& xtmu, double sigma, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  return curve_point(xtmu, sigma, lambda, std::sqrt(2.0 * lambda));
}

CurvePoint df_relaxed_lasso_orthogonal(const Vector& xtmu, double sigma, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  return curve_point(xtmu, sigma, lambda, lambda);
}

double sdf_null(int p, double sigma, double lambda) {
  check_sigma(sigma);
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  const double u = std::sqrt(2.0 * lambda) / sigma;
  return 2.0 * p * u * normal_pdf(u);
}

double sdf_sparse(const Vector& beta_star, double sigma, double lambda) {
  check_sigma(sigma);
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  const double t = std::sqrt(2.0 * lambda);
  double active = 0.0;
  long null_count = 0;
  for (Eigen::Index i = 0; i < beta_star.size(); ++i) {
    if (beta_star[i] == 0.0) {
      ++null_count;
    } else {
      active += normal_pdf((t - beta_star[i]) / sigma) + normal_pdf((t + beta_star[i]) / sigma);
    }
  }
  return t / sigma * active + 2.0 * static_cast<double>(null_count) * (t / sigma) * normal_pdf(t / sigma);
}

double sdf_dense(const Vector& beta_star, double sigma, double lambda) {
  if (!(lambda >= 0.0)) throw ArgumentError("lambda must be nonnegative");
  return search_term_hard(beta_star, sigma, std::sqrt(2.0 * lambda));
}

double threshold_for_expected_active(const Vector& mu, double sigma, double target,
                                     double tolerance) {
  const double p = static_cast<double>(mu.size());
  if (!(target > 0.0 && target < p)) {
    throw ArgumentError("target expected active size must lie strictly between 0 and p");
  }
  // E|A_t| decreases from p at t = 0 to 0 as t grows.
  double lo = 0.0;
  double hi = sigma;
  while (expected_active_hard(mu, sigma, hi) > target) hi *= 2.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double ea = expected_active_hard(mu, sigma, mid);
    if (std::abs(ea - target) <= tolerance) return mid;
    if (ea > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace dfsearch
