#pragma once

#include "dfsearch/fitters.hpp"
#include "dfsearch/model.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace dfsearch {

/// Point estimate with a delete-one jackknife standard error over replications.
struct DfEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long reps = 0;
  double mean_active = 0.0;
  double mean_rank = 0.0;
};

enum class Centering {
  sample_mean,  // sample covariance with 1/(reps - 1)
  known_mean,   // average of f_i(y) (y_i - mu_i)
};

struct McOptions {
  Centering centering = Centering::sample_mean;
};

using FitFunction = std::function<FitOutput(const Vector&)>;

/// Monte Carlo estimate of (1/sigma^2) sum_i Cov(f_i(y), y_i). Replication r
/// draws y from stream (seed, r).
DfEstimate estimate_df(const FitProcedure& proc, const SignalSpec& signal, long reps,
                       std::uint64_t seed, const McOptions& options = {});
DfEstimate estimate_df(const FitFunction& fit, const SignalSpec& signal, long reps,
                       std::uint64_t seed, const McOptions& options = {});

/// Search degrees of freedom: df of the least squares refit on each
/// replication's active set, minus the mean rank of X_A. Selection and
/// covariance use the same draws.
DfEstimate estimate_sdf(const FitProcedure& proc, const SignalSpec& signal, long reps,
                        std::uint64_t seed, const McOptions& options = {});

struct OptimismEstimate {
  double optimism = 0.0;  // mean of ||y' - f(y)||^2 - ||y - f(y)||^2
  double optimism_se = 0.0;
  double two_sigma2_df = 0.0;  // 2 sigma^2 df-hat from the same y draws
  double two_sigma2_df_se = 0.0;
  DfEstimate df;
};

/// y' is drawn from the auxiliary stream paired with each replication.
OptimismEstimate estimate_optimism(const FitFunction& fit, const SignalSpec& signal, long reps,
                                   std::uint64_t seed, const McOptions& options = {});
OptimismEstimate estimate_optimism(const FitProcedure& proc, const SignalSpec& signal, long reps,
                                   std::uint64_t seed, const McOptions& options = {});

struct ExperimentGrid {
  ProcedureKind kind = ProcedureKind::lasso;
  std::vector<double> lambda_grid;  // strictly increasing, nonnegative
  std::shared_ptr<const DesignMatrix> design;
  SignalSpec signal;
  long reps = 100;
  std::uint64_t seed = 0;
  bool with_sdf = false;
  McOptions options;
};

struct CurveRow {
  double lambda = 0.0;
  double mean_active = 0.0;
  double mean_rank = 0.0;
  double df_hat = 0.0;
  double se = 0.0;
  double sdf_hat = 0.0;  // NaN unless requested
  double sdf_se = 0.0;
};

using CurveTable = std::vector<CurveRow>;

/// df (and optionally sdf) at every grid value, reusing replication streams
/// across lambda (common random numbers).
CurveTable run_grid(const ExperimentGrid& grid);

/// `count` values log-spaced from ratio*lambda_max up to lambda_max.
std::vector<double> log_lambda_grid(double lambda_max, double ratio, int count);

/// ||X' mu||_inf: the smallest lasso tuning value giving an empty fit on the
/// noiseless response.
double noiseless_lambda_max(const DesignMatrix& design, const Vector& mu);

namespace detail {

struct CovarianceSummary {
  double value = 0.0;
  double std_error = 0.0;
};

// df-hat and its jackknife SE from replication-major fits and responses.
// `offset` (length reps) is subtracted from each replication's contribution
// before the jackknife; sdf uses it for the rank term.
CovarianceSummary covariance_df(const Matrix& fits, const Matrix& responses, const Vector& mu,
                                double sigma, Centering centering,
                                const Vector* offset = nullptr);

}  // namespace detail

}  // namespace dfsearch
