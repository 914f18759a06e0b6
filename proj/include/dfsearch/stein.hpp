#pragma once

#include "dfsearch/fitters.hpp"
#include "dfsearch/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dfsearch {

/// Real function that is absolutely continuous between finitely many
/// breakpoints, with finite one-sided limits at each of them.
class PiecewiseScalarFunction {
 public:
  using Fn = std::function<double(double)>;

  /// `left_limit` / `right_limit` are only consulted at breakpoints.
  PiecewiseScalarFunction(std::string name, std::vector<double> breakpoints, Fn value,
                          Fn derivative, Fn left_limit, Fn right_limit);

  /// Pieces p_0..p_m given as polynomial coefficients (constant term first);
  /// p_k applies on (breakpoints[k-1], breakpoints[k]).
  static PiecewiseScalarFunction piecewise_polynomial(std::string name,
                                                      std::vector<double> breakpoints,
                                                      std::vector<std::vector<double>> pieces);

  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  double evaluate(double x) const { return value_(x); }
  double derivative(double x) const { return derivative_(x); }
  double left_limit(double delta) const { return left_(delta); }
  double right_limit(double delta) const { return right_(delta); }

 private:
  std::string name_;
  std::vector<double> breakpoints_;
  Fn value_, derivative_, left_, right_;
};

/// The function family used by the univariate identity checks: smooth cases,
/// hard and soft thresholds, sign, unit step, clipped linear, polynomial
/// pieces, and a removable (zero-jump) breakpoint.
std::vector<PiecewiseScalarFunction> builtin_function_library();

PiecewiseScalarFunction hard_threshold_function(double t);

/// (1/sigma^2) E[(X - mu) f(X)], X ~ N(mu, sigma^2), by quadrature over
/// mu +- 12 sigma with panels split at the breakpoints.
double stein_lhs_univariate(const PiecewiseScalarFunction& f, double mu, double sigma);

/// E[f'(X)] + (1/sigma) sum_k phi((delta_k - mu)/sigma) (f(delta_k)+ - f(delta_k)-).
double stein_rhs_univariate(const PiecewiseScalarFunction& f, double mu, double sigma);

/// |lhs - rhs|.
double verify_stein_univariate(const PiecewiseScalarFunction& f, double mu, double sigma);

struct JumpRecord {
  double location = 0.0;
  double left = 0.0;
  double right = 0.0;
  double jump = 0.0;  // right - left
};

struct ScanOptions {
  int grid_points = 4096;
  // Cells whose second difference exceeds this are bisected.
  double flag_tolerance = 1e-7;
  // Located breakpoints with |right - left| at or below this are kinks or
  // noise and are dropped.
  double jump_threshold = 1e-6;
  double bracket_width = 1e-9;
  double limit_offset = 1e-7;
  // Local regrids allowed when a cell holds more than one breakpoint.
  int max_refinements = 3;
  int refinement_points = 64;
};

/// Discontinuities of a scalar map on [lo, hi], for maps that are piecewise
/// linear (or nearly so) between breakpoints.
std::vector<JumpRecord> scan_discontinuities(const CoordinateMap& g, double lo, double hi,
                                             const ScanOptions& options = {});

/// Jumps of s -> f_i(s, y_{-i}) on [lo, hi].
std::vector<JumpRecord> scan_discontinuities(const FitProcedure& proc, int coord,
                                             const Vector& y_fixed, double lo, double hi,
                                             const ScanOptions& options = {});

struct SteinDecomposition {
  double divergence = 0.0;  // E sum_i d f_i / d y_i
  double divergence_se = 0.0;
  double boundary = 0.0;  // (1/sigma) E sum_i sum_delta phi((delta - mu_i)/sigma) jump
  double boundary_se = 0.0;
  double total = 0.0;
  double total_se = 0.0;
  double mean_active = 0.0;
  long reps = 0;
  long jumps_found = 0;
  // Set when the per-replication boundary sums look heavy tailed (sample
  // excess kurtosis above 50), a sign the integrability condition may fail.
  bool heavy_tailed_boundary = false;
};

struct DecomposeOptions {
  double step_scale = 1e-5;  // finite-difference step h = step_scale * sigma
  double scan_half_width = 8.0;  // scan mu_i +- scan_half_width * sigma
  ScanOptions scan;
};

/// Monte Carlo estimate of the divergence and boundary terms of the
/// discontinuous Stein formula; their sum estimates df.
SteinDecomposition stein_decompose_df(const FitProcedure& proc, const SignalSpec& signal,
                                      long reps, std::uint64_t seed,
                                      const DecomposeOptions& options = {});

struct JumpViolation {
  long trial = 0;
  int coord = 0;
  JumpRecord record;
};

struct PositivityReport {
  std::vector<JumpViolation> violations;
  long trials = 0;
  long jumps_examined = 0;
};

/// Scans random (i, y_{-i}) slices and reports every jump with a negative
/// sign.
PositivityReport check_jump_positivity(const FitProcedure& proc, const SignalSpec& signal,
                                       long trials, std::uint64_t seed,
                                       const DecomposeOptions& options = {});

}  // namespace dfsearch
