#include "dfsearch/monte_carlo.hpp"

#include "dfsearch/errors.hpp"
#include "dfsearch/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dfsearch {

namespace {

constexpr std::uint64_t kOptimismStreamTag = 1;

void check_reps(long reps) {
  if (reps < 2) throw ArgumentError("Monte Carlo estimates need reps >= 2");
}

// Per-replication results stored replication-major.
struct Replications {
  Matrix responses;  // reps x n
  Matrix fits;       // reps x n
  Matrix refits;     // reps x n, least squares on the active set (if requested)
  Vector active;     // |A|
  Vector rank;       // rank(X_A)
};

template <class Body>
void for_each_replication(long reps, Body&& body) {
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    try {
      body(static_cast<long>(r));
    } catch (const ReplicationError&) {
      throw;
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (replication " << r << ")";
      throw ReplicationError(e.category(), os.str(), r);
    }
  });
}

Replications simulate(const FitFunction& fit, const FitProcedure* proc, const SignalSpec& signal,
                      long reps, std::uint64_t seed, bool refit) {
  const Eigen::Index n = signal.size();
  Replications out;
  out.responses.resize(reps, n);
  out.fits.resize(reps, n);
  if (refit) out.refits.resize(reps, n);
  out.active.resize(reps);
  out.rank.resize(reps);

  for_each_replication(reps, [&](long r) {
    const Vector y = sample_response(signal, {seed, static_cast<std::uint64_t>(r)});
    const FitOutput f = fit(y);
    if (f.fitted.size() != n) throw ArgumentError("fit returned wrong number of fitted values");
    out.responses.row(r) = y.transpose();
    out.fits.row(r) = f.fitted.transpose();
    out.active[r] = static_cast<double>(f.active_set.size());
    if (refit) {
      const FitOutput ls = least_squares_on_support(proc->design(), y, f.active_set);
      out.refits.row(r) = ls.fitted.transpose();
      out.rank[r] = ls.rank;
    } else {
      out.rank[r] = f.rank;
    }
  });
  return out;
}

FitFunction as_function(const FitProcedure& proc) {
  return [&proc](const Vector& y) { return proc.fit(y); };
}

DfEstimate summarize_df(const Replications& reps, const SignalSpec& signal,
                        const McOptions& options) {
  const auto cov = detail::covariance_df(reps.fits, reps.responses, signal.mu(), signal.sigma(),
                                         options.centering);
  DfEstimate est;
  est.value = cov.value;
  est.std_error = cov.std_error;
  est.reps = static_cast<long>(reps.active.size());
  est.mean_active = reps.active.mean();
  est.mean_rank = reps.rank.mean();
  return est;
}

DfEstimate summarize_sdf(const Replications& reps, const SignalSpec& signal,
                         const McOptions& options) {
  const auto cov = detail::covariance_df(reps.refits, reps.responses, signal.mu(), signal.sigma(),
                                         options.centering, &reps.rank);
  DfEstimate est;
  est.value = cov.value;
  est.std_error = cov.std_error;
  est.reps = static_cast<long>(reps.active.size());
  est.mean_active = reps.active.mean();
  est.mean_rank = reps.rank.mean();
  return est;
}

}  // namespace

namespace detail {

CovarianceSummary covariance_df(const Matrix& fits, const Matrix& responses, const Vector& mu,
                                double sigma, Centering centering, const Vector* offset) {
  const Eigen::Index reps = fits.rows();
  const Eigen::Index n = fits.cols();
  const double big_r = static_cast<double>(reps);
  const double s2 = sigma * sigma;
  Vector off = offset ? *offset : Vector::Zero(reps);
  const double off_sum = off.sum();

  // Per-replication contributions and leave-one-out estimates.
  Vector loo(reps);
  double value = 0.0;
  if (centering == Centering::sample_mean) {
    const Eigen::RowVectorXd fbar = fits.colwise().mean();
    const Eigen::RowVectorXd ybar = responses.colwise().mean();
    Vector d(reps);
    for (Eigen::Index r = 0; r < reps; ++r) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += (fits(r, i) - fbar[i]) * (responses(r, i) - ybar[i]);
      }
      d[r] = acc;
    }
    const double total = d.sum();
    value = total / ((big_r - 1.0) * s2) - off_sum / big_r;
    for (Eigen::Index r = 0; r < reps; ++r) {
      // With one remaining replication the sample covariance is taken as 0.
      const double cov_loo =
          reps > 2 ? (total - big_r / (big_r - 1.0) * d[r]) / ((big_r - 2.0) * s2) : 0.0;
      loo[r] = cov_loo - (off_sum - off[r]) / (big_r - 1.0);
    }
  } else {
    Vector e(reps);
    for (Eigen::Index r = 0; r < reps; ++r) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) acc += fits(r, i) * (responses(r, i) - mu[i]);
      e[r] = acc / s2 - off[r];
    }
    const double total = e.sum();
    value = total / big_r;
    for (Eigen::Index r = 0; r < reps; ++r) loo[r] = (total - e[r]) / (big_r - 1.0);
  }

  const double loo_mean = loo.mean();
  double ss = 0.0;
  for (Eigen::Index r = 0; r < reps; ++r) ss += (loo[r] - loo_mean) * (loo[r] - loo_mean);
  return {value, std::sqrt((big_r - 1.0) / big_r * ss)};
}

}  // namespace detail

DfEstimate estimate_df(const FitProcedure& proc, const SignalSpec& signal, long reps,
                       std::uint64_t seed, const McOptions& options) {
  check_reps(reps);
  return summarize_df(simulate(as_function(proc), &proc, signal, reps, seed, false), signal,
                      options);
}

DfEstimate estimate_df(const FitFunction& fit, const SignalSpec& signal, long reps,
                       std::uint64_t seed, const McOptions& options) {
  check_reps(reps);
  return summarize_df(simulate(fit, nullptr, signal, reps, seed, false), signal, options);
}

DfEstimate estimate_sdf(const FitProcedure& proc, const SignalSpec& signal, long reps,
                        std::uint64_t seed, const McOptions& options) {
  check_reps(reps);
  return summarize_sdf(simulate(as_function(proc), &proc, signal, reps, seed, true), signal,
                       options);
}

OptimismEstimate estimate_optimism(const FitFunction& fit, const SignalSpec& signal, long reps,
                                   std::uint64_t seed, const McOptions& options) {
  check_reps(reps);
  const Replications sims = simulate(fit, nullptr, signal, reps, seed, false);

  Vector gap(reps);
  for_each_replication(reps, [&](long r) {
    const Vector y_test = sample_response(
        signal, {seed, auxiliary_stream(static_cast<std::uint64_t>(r), kOptimismStreamTag)});
    const auto f = sims.fits.row(r).transpose();
    const auto y = sims.responses.row(r).transpose();
    gap[r] = (y_test - f).squaredNorm() - (y - f).squaredNorm();
  });

  OptimismEstimate out;
  out.df = summarize_df(sims, signal, options);
  out.optimism = gap.mean();
  const double var = (gap.array() - out.optimism).square().sum() / static_cast<double>(reps - 1);
  out.optimism_se = std::sqrt(var / static_cast<double>(reps));
  const double scale = 2.0 * signal.sigma() * signal.sigma();
  out.two_sigma2_df = scale * out.df.value;
  out.two_sigma2_df_se = scale * out.df.std_error;
  return out;
}

OptimismEstimate estimate_optimism(const FitProcedure& proc, const SignalSpec& signal, long reps,
                                   std::uint64_t seed, const McOptions& options) {
  return estimate_optimism(as_function(proc), signal, reps, seed, options);
}

CurveTable run_grid(const ExperimentGrid& grid) {
  check_reps(grid.reps);
  if (!grid.design) throw ArgumentError("experiment grid needs a design");
  if (grid.signal.size() != grid.design->rows()) {
    throw ArgumentError("signal length does not match design rows");
  }
  for (std::size_t k = 0; k < grid.lambda_grid.size(); ++k) {
    if (!(grid.lambda_grid[k] >= 0.0) ||
        (k > 0 && !(grid.lambda_grid[k] > grid.lambda_grid[k - 1]))) {
      throw ArgumentError("lambda grid must be nonnegative and strictly increasing");
    }
  }

  CurveTable table;
  table.reserve(grid.lambda_grid.size());
  for (std::size_t k = 0; k < grid.lambda_grid.size(); ++k) {
    const double lambda = grid.lambda_grid[k];
    const FitProcedure proc(grid.kind, lambda, grid.design);
    Replications sims;
    try {
      sims = simulate(as_function(proc), &proc, grid.signal, grid.reps, grid.seed, grid.with_sdf);
    } catch (const ReplicationError& e) {
      std::ostringstream os;
      os << e.what() << " at lambda index " << k;
      throw ReplicationError(e.category(), os.str(), e.replication());
    }
    const DfEstimate df = summarize_df(sims, grid.signal, grid.options);
    CurveRow row;
    row.lambda = lambda;
    row.mean_active = df.mean_active;
    row.mean_rank = df.mean_rank;
    row.df_hat = df.value;
    row.se = df.std_error;
    row.sdf_hat = std::numeric_limits<double>::quiet_NaN();
    row.sdf_se = std::numeric_limits<double>::quiet_NaN();
    if (grid.with_sdf) {
      const DfEstimate sdf = summarize_sdf(sims, grid.signal, grid.options);
      row.sdf_hat = sdf.value;
      row.sdf_se = sdf.std_error;
      row.mean_rank = sdf.mean_rank;
    }
    table.push_back(row);
  }
  return table;
}

std::vector<double> log_lambda_grid(double lambda_max, double ratio, int count) {
  if (!(lambda_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1) {
    throw ArgumentError("log grid needs lambda_max > 0, 0 < ratio < 1, count >= 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double lo = std::log(ratio * lambda_max);
  const double hi = std::log(lambda_max);
  for (int k = 0; k < count; ++k) {
    grid[static_cast<std::size_t>(k)] = std::exp(lo + (hi - lo) * k / (count - 1));
  }
  grid.back() = lambda_max;
  return grid;
}

double noiseless_lambda_max(const DesignMatrix& design, const Vector& mu) {
  return (design.values().transpose() * mu).cwiseAbs().maxCoeff();
}

}  // namespace dfsearch
