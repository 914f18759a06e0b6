#pragma once

#include "dfsearch/model.hpp"

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dfsearch {

/// Result of one fit: coefficients, their support, fitted values X*beta.
struct FitOutput {
  Vector beta;
  std::vector<int> active_set;  // sorted
  Vector fitted;
  double objective = 0.0;
  int rank = 0;  // rank of X restricted to active_set
};

enum class ProcedureKind {
  least_squares_on_support,
  lasso,
  best_subset,
  relaxed_lasso,
  ridge,
  hard_threshold,
  soft_threshold,
};

std::string_view to_string(ProcedureKind kind);
ProcedureKind procedure_kind_from_string(std::string_view name);

struct LassoOptions {
  double tolerance = 1e-10;  // max coefficient change in one sweep
  long max_sweeps = 100000;
};

/// Largest subset-search dimension accepted by best_subset_solve.
inline constexpr int kMaxSubsetPredictors = 25;

/// Componentwise sign(v) * max(|v| - t, 0).
Vector soft_threshold(const Vector& v, double t);

/// Componentwise v * 1{|v| >= t}; the boundary |v| = t is kept.
Vector hard_threshold(const Vector& v, double t);

/// Least squares of y on the columns in `support`, via the pseudoinverse so
/// rank-deficient supports are allowed.
FitOutput least_squares_on_support(const DesignMatrix& x, const Vector& y,
                                   const std::vector<int>& support);

/// Minimizer of 0.5*||y - X b||^2 + lambda*||b||_1 by cyclic coordinate
/// descent. Throws ConvergenceError carrying the KKT residual when the sweep
/// budget runs out.
FitOutput lasso_solve(const DesignMatrix& x, const Vector& y, double lambda,
                      const LassoOptions& options = {});

/// max_j of the KKT violation of `beta` for the lasso at `lambda`.
double lasso_kkt_residual(const DesignMatrix& x, const Vector& y, const Vector& beta,
                          double lambda);

/// Global minimizer of 0.5*||y - X b||^2 + lambda*||b||_0 over all 2^p
/// supports. Ties within 1e-12 (relative to max(1, 0.5*||y||^2)) go to the
/// smaller support, then to the lexicographically smaller index set.
FitOutput best_subset_solve(const DesignMatrix& x, const Vector& y, double lambda);

/// Least squares refit on the lasso active set.
FitOutput relaxed_lasso_fit(const DesignMatrix& x, const Vector& y, double lambda,
                            const LassoOptions& options = {});

/// beta = (X'X + lambda I)^{-1} X'y. The active set is every index.
FitOutput ridge_fit(const DesignMatrix& x, const Vector& y, double lambda);

/// s -> i-th fitted value when y_i is replaced by s and the rest held fixed.
using CoordinateMap = std::function<double(double)>;

/// One fitting procedure y -> (beta, A, X beta) with fixed design and tuning.
///
/// For the threshold kinds the coefficients are H_t(X'y) or S_t(X'y), which is
/// the exact best-subset / lasso solution when X is orthogonal.
class FitProcedure {
 public:
  FitProcedure(ProcedureKind kind, double lambda, std::shared_ptr<const DesignMatrix> design,
               std::vector<int> support = {}, LassoOptions lasso_options = {});

  ProcedureKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  const DesignMatrix& design() const noexcept { return *design_; }
  const std::shared_ptr<const DesignMatrix>& design_ptr() const noexcept { return design_; }
  const std::vector<int>& support() const noexcept { return support_; }

  FitOutput fit(const Vector& y) const;

  /// Coordinate slice s -> f_i(s, y_{-i}). Best subset precomputes every
  /// support's residual quadratic in s once so each evaluation is a scan over
  /// 2^p parabolas; other kinds refit.
  CoordinateMap coordinate_map(const Vector& y, int i) const;

  /// Same procedure with another tuning value.
  FitProcedure with_lambda(double lambda) const;

 private:
  ProcedureKind kind_;
  double lambda_;
  std::shared_ptr<const DesignMatrix> design_;
  std::vector<int> support_;
  LassoOptions lasso_options_;
  std::shared_ptr<const Matrix> gram_;
};

namespace detail {

// Coordinate descent on the Gram form. Returns sweeps used, or -1 when the
// budget ran out.
long lasso_cd(const Matrix& gram, const Vector& xty, double lambda, const LassoOptions& options,
              Vector& beta);

FitOutput lasso_from_gram(const DesignMatrix& x, const Matrix& gram, const Vector& y,
                          double lambda, const LassoOptions& options);

// Exhaustive Gray-code search; returns the winning support (sorted).
std::vector<int> best_subset_support(const Matrix& x, const Matrix& gram, const Vector& y,
                                     double lambda);

CoordinateMap best_subset_coordinate_map(const Matrix& x, const Matrix& gram, const Vector& y,
                                         int i, double lambda);

}  // namespace detail

}  // namespace dfsearch
