#include "dfsearch/stein.hpp"

#include "dfsearch/closed_form.hpp"
#include "dfsearch/errors.hpp"
#include "dfsearch/parallel.hpp"
#include "dfsearch/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dfsearch {

namespace {

constexpr double kWindow = 12.0;

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

double horner_derivative(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) v = v * x + static_cast<double>(k) * c[k];
  return v;
}

void check_scale(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ArgumentError("sigma must be positive");
}

double checked_integral(const std::function<double(double)>& f, double a, double b,
                        const std::vector<double>& breaks) {
  const QuadratureResult q = integrate(f, a, b, breaks);
  if (!q.converged) {
    std::ostringstream os;
    os << "quadrature did not converge (estimated error " << q.error << ")";
    throw QuadratureError(os.str(), q.error);
  }
  return q.value;
}

}  // namespace

PiecewiseScalarFunction::PiecewiseScalarFunction(std::string name, std::vector<double> breakpoints,
                                                 Fn value, Fn derivative, Fn left_limit,
                                                 Fn right_limit)
    : name_(std::move(name)),
      breakpoints_(std::move(breakpoints)),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      left_(std::move(left_limit)),
      right_(std::move(right_limit)) {
  for (std::size_t k = 1; k < breakpoints_.size(); ++k) {
    if (!(breakpoints_[k] > breakpoints_[k - 1])) {
      throw ArgumentError("breakpoints must be strictly increasing");
    }
  }
}

PiecewiseScalarFunction PiecewiseScalarFunction::piecewise_polynomial(
    std::string name, std::vector<double> breakpoints, std::vector<std::vector<double>> pieces) {
  if (pieces.size() != breakpoints.size() + 1) {
    throw ArgumentError("piecewise polynomial needs one more piece than breakpoints");
  }
  auto br = std::make_shared<const std::vector<double>>(breakpoints);
  auto pc = std::make_shared<const std::vector<std::vector<double>>>(std::move(pieces));
  // Piece index for x: number of breakpoints <= x.
  auto piece_of = [br](double x) {
    return static_cast<std::size_t>(std::upper_bound(br->begin(), br->end(), x) - br->begin());
  };
  auto value = [pc, piece_of](double x) { return horner((*pc)[piece_of(x)], x); };
  auto deriv = [pc, piece_of](double x) { return horner_derivative((*pc)[piece_of(x)], x); };
  auto left = [pc, br](double d) {
    const auto k = static_cast<std::size_t>(std::lower_bound(br->begin(), br->end(), d) - br->begin());
    return horner((*pc)[k], d);
  };
  auto right = [pc, br](double d) {
    const auto k = static_cast<std::size_t>(std::upper_bound(br->begin(), br->end(), d) - br->begin());
    return horner((*pc)[k], d);
  };
  return PiecewiseScalarFunction(std::move(name), std::move(breakpoints), value, deriv, left,
                                 right);
}

PiecewiseScalarFunction hard_threshold_function(double t) {
  if (!(t >= 0.0)) throw ArgumentError("threshold must be nonnegative");
  if (t == 0.0) return PiecewiseScalarFunction::piecewise_polynomial("hard-threshold(0)", {}, {{0.0, 1.0}});
  std::ostringstream name;
  name << "hard-threshold(" << t << ")";
  // Values at exactly +-t follow the closed convention |x| >= t.
  auto value = [t](double x) { return std::abs(x) >= t ? x : 0.0; };
  auto deriv = [t](double x) { return std::abs(x) >= t ? 1.0 : 0.0; };
  auto left = [](double d) { return d > 0.0 ? 0.0 : d; };
  auto right = [](double d) { return d > 0.0 ? d : 0.0; };
  return PiecewiseScalarFunction(name.str(), {-t, t}, value, deriv, left, right);
}

std::vector<PiecewiseScalarFunction> builtin_function_library() {
  using P = PiecewiseScalarFunction;
  std::vector<P> lib;
  lib.push_back(P::piecewise_polynomial("identity", {}, {{0.0, 1.0}}));
  lib.push_back(P::piecewise_polynomial("constant", {}, {{2.5}}));
  lib.push_back(P::piecewise_polynomial("cubic", {}, {{1.0, -1.0, 0.0, 0.3}}));
  lib.push_back(P("sine", {}, [](double x) { return std::sin(x); },
                  [](double x) { return std::cos(x); }, [](double x) { return std::sin(x); },
                  [](double x) { return std::sin(x); }));
  lib.push_back(hard_threshold_function(1.0));
  lib.push_back(hard_threshold_function(2.5));
  lib.push_back(P::piecewise_polynomial("soft-threshold(0.5)", {-0.5, 0.5},
                                        {{0.5, 1.0}, {0.0}, {-0.5, 1.0}}));
  lib.push_back(P::piecewise_polynomial("sign", {0.0}, {{-1.0}, {1.0}}));
  lib.push_back(P::piecewise_polynomial("unit-step", {0.0}, {{0.0}, {1.0}}));
  lib.push_back(P::piecewise_polynomial("clipped-linear", {-1.0, 2.0}, {{-1.0}, {0.0, 1.0}, {2.0}}));
  lib.push_back(P::piecewise_polynomial("polynomial-pieces", {-1.0, 0.5, 2.0},
                                        {{1.0, 2.0}, {0.0, 0.0, 1.0}, {-3.0, 1.0}, {0.0, 0.0, 0.0, 0.1}}));
  // f(x) = x everywhere except the isolated value f(0.3) = 7.
  lib.push_back(P("removable", {0.3}, [](double x) { return x == 0.3 ? 7.0 : x; },
                  [](double) { return 1.0; }, [](double d) { return d; },
                  [](double d) { return d; }));
  return lib;
}

double stein_lhs_univariate(const PiecewiseScalarFunction& f, double mu, double sigma) {
  check_scale(sigma);
  const auto integrand = [&](double x) {
    const double z = (x - mu) / sigma;
    return (x - mu) * f.evaluate(x) * normal_pdf(z) / (sigma * sigma * sigma);
  };
  return checked_integral(integrand, mu - kWindow * sigma, mu + kWindow * sigma, f.breakpoints());
}

double stein_rhs_univariate(const PiecewiseScalarFunction& f, double mu, double sigma) {
  check_scale(sigma);
  const auto integrand = [&](double x) {
    return f.derivative(x) * normal_pdf((x - mu) / sigma) / sigma;
  };
  double value =
      checked_integral(integrand, mu - kWindow * sigma, mu + kWindow * sigma, f.breakpoints());
  for (double d : f.breakpoints()) {
    value += normal_pdf((d - mu) / sigma) * (f.right_limit(d) - f.left_limit(d)) / sigma;
  }
  return value;
}

double verify_stein_univariate(const PiecewiseScalarFunction& f, double mu, double sigma) {
  return std::abs(stein_lhs_univariate(f, mu, sigma) - stein_rhs_univariate(f, mu, sigma));
}

// ---------------------------------------------------------------------------
// Discontinuity scanning

namespace {

class Scanner {
 public:
  Scanner(const CoordinateMap& g, const ScanOptions& opt) : g_(g), opt_(opt) {}

  void scan(double lo, double hi, int points, int depth) {
    const double h = (hi - lo) / (points - 1);
    // v[k + 1] = g(lo + k h) for k = -1 .. points; the two outer samples give
    // every cell a neighbour on each side.
    std::vector<double> s(static_cast<std::size_t>(points + 2));
    std::vector<double> v(s.size());
    for (int k = -1; k <= points; ++k) {
      s[static_cast<std::size_t>(k + 1)] = lo + k * h;
      v[static_cast<std::size_t>(k + 1)] = g_(s[static_cast<std::size_t>(k + 1)]);
    }
    auto d2 = [&](std::size_t c) { return v[c + 1] - 2.0 * v[c] + v[c - 1]; };

    for (std::size_t c = 1; c + 2 < s.size(); ++c) {
      // cell [s[c], s[c+1]]
      if (std::max(std::abs(d2(c)), std::abs(d2(c + 1))) <= opt_.flag_tolerance) continue;
      locate(s, v, c, h, depth);
    }
  }

  std::vector<JumpRecord> take() {
    std::sort(found_.begin(), found_.end(),
              [](const JumpRecord& a, const JumpRecord& b) { return a.location < b.location; });
    std::vector<JumpRecord> merged;
    for (const auto& j : found_) {
      if (!merged.empty() && j.location - merged.back().location < 10.0 * opt_.bracket_width) {
        continue;
      }
      merged.push_back(j);
    }
    return merged;
  }

 private:
  void locate(const std::vector<double>& s, const std::vector<double>& v, std::size_t c, double h,
              int depth) {
    const double left_slope = (v[c] - v[c - 1]) / h;
    const double right_slope = (v[c + 2] - v[c + 1]) / h;
    double l = s[c], r = s[c + 1];
    double fl = v[c], fr = v[c + 1];
    while (r - l > opt_.bracket_width) {
      const double m = 0.5 * (l + r);
      if (!(m > l && m < r)) break;
      const double fm = g_(m);
      const double err_left = std::abs(fm - (fl + left_slope * (m - l)));
      const double err_right = std::abs(fm - (fr - right_slope * (r - m)));
      if (err_left <= err_right) {
        l = m;
        fl = fm;
      } else {
        r = m;
        fr = fm;
      }
    }
    const double delta = 0.5 * (l + r);
    // One-sided limits: samples at delta -+ offset, extrapolated linearly to
    // delta from a second sample one offset further out.
    const double off = opt_.limit_offset;
    const double left = 2.0 * g_(delta - off) - g_(delta - 2.0 * off);
    const double right = 2.0 * g_(delta + off) - g_(delta + 2.0 * off);
    if (std::abs(right - left) <= opt_.jump_threshold) return;

    const double tol = 1e-6 * (1.0 + std::abs(left) + std::abs(right));
    // Bisection in a cell next to the breakpoint ends on the shared edge; the
    // breakpoint belongs to this cell only if the two grid values straddle it.
    if (std::abs(v[c + 1] - (left + left_slope * (s[c + 1] - delta))) <= tol ||
        std::abs(v[c] - (right - right_slope * (delta - s[c]))) <= tol) {
      return;
    }

    // A lone breakpoint between linear neighbours must be reproduced by the
    // neighbouring slopes on both sides.
    const double pred_left = v[c] + left_slope * (delta - s[c]);
    const double pred_right = v[c + 1] - right_slope * (s[c + 1] - delta);
    if (std::abs(left - pred_left) <= tol && std::abs(right - pred_right) <= tol) {
      found_.push_back({delta, left, right, right - left});
      return;
    }
    if (depth >= opt_.max_refinements) {
      std::ostringstream os;
      os << "more than one breakpoint near " << delta
         << " could not be separated; use a finer scan grid";
      throw ScanError(os.str());
    }
    scan(s[c - 1], s[c + 2], opt_.refinement_points, depth + 1);
  }

  const CoordinateMap& g_;
  const ScanOptions& opt_;
  std::vector<JumpRecord> found_;
};

double excess_kurtosis(const Vector& x) {
  const double m = x.mean();
  const double v = (x.array() - m).square().mean();
  if (!(v > 0.0)) return 0.0;
  return (x.array() - m).pow(4).mean() / (v * v) - 3.0;
}

double standard_error(const Vector& x) {
  const auto n = static_cast<double>(x.size());
  const double m = x.mean();
  return std::sqrt((x.array() - m).square().sum() / (n - 1.0) / n);
}

}  // namespace

std::vector<JumpRecord> scan_discontinuities(const CoordinateMap& g, double lo, double hi,
                                             const ScanOptions& options) {
  if (!(lo < hi)) throw ArgumentError("scan range needs lo < hi");
  if (options.grid_points < 4 || options.refinement_points < 4) {
    throw ArgumentError("scan grid needs at least 4 points");
  }
  Scanner scanner(g, options);
  scanner.scan(lo, hi, options.grid_points, 0);
  return scanner.take();
}

std::vector<JumpRecord> scan_discontinuities(const FitProcedure& proc, int coord,
                                             const Vector& y_fixed, double lo, double hi,
                                             const ScanOptions& options) {
  return scan_discontinuities(proc.coordinate_map(y_fixed, coord), lo, hi, options);
}

SteinDecomposition stein_decompose_df(const FitProcedure& proc, const SignalSpec& signal,
                                      long reps, std::uint64_t seed,
                                      const DecomposeOptions& options) {
  if (reps < 2) throw ArgumentError("decomposition needs reps >= 2");
  const Eigen::Index n = signal.size();
  const double sigma = signal.sigma();
  Vector divergence(reps), boundary(reps), active(reps);
  std::vector<long> jumps(static_cast<std::size_t>(reps), 0);

  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rr) {
    const long r = static_cast<long>(rr);
    try {
      const Vector y = sample_response(signal, {seed, rr});
      active[r] = static_cast<double>(proc.fit(y).active_set.size());
      double div = 0.0;
      double bnd = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const CoordinateMap g = proc.coordinate_map(y, static_cast<int>(i));
        const double yi = y[i];
        const double f0 = g(yi);
        double h = options.step_scale * sigma;
        bool resolved = false;
        for (int attempt = 0; attempt < 2 && !resolved; ++attempt, h /= 10.0) {
          const double fp = g(yi + h);
          const double fm = g(yi - h);
          const double central = 0.5 * (fp - fm) / h;
          const double forward = (fp - f0) / h;
          const double backward = (f0 - fm) / h;
          if (std::abs(forward - backward) <= 1e-3 * (1.0 + std::abs(central))) {
            div += central;
            resolved = true;
          }
        }
        if (!resolved) {
          throw ScanError("finite-difference step straddles a discontinuity after refinement");
        }

        const double mu_i = signal.mu()[i];
        const auto found = scan_discontinuities(g, mu_i - options.scan_half_width * sigma,
                                                mu_i + options.scan_half_width * sigma,
                                                options.scan);
        for (const auto& j : found) bnd += normal_pdf((j.location - mu_i) / sigma) * j.jump;
        jumps[rr] += static_cast<long>(found.size());
      }
      divergence[r] = div;
      boundary[r] = bnd / sigma;
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (replication " << rr << ")";
      throw ReplicationError(e.category(), os.str(), rr);
    }
  });

  SteinDecomposition out;
  out.reps = reps;
  out.divergence = divergence.mean();
  out.divergence_se = standard_error(divergence);
  out.boundary = boundary.mean();
  out.boundary_se = standard_error(boundary);
  const Vector total = divergence + boundary;
  out.total = total.mean();
  out.total_se = standard_error(total);
  out.mean_active = active.mean();
  out.jumps_found = std::accumulate(jumps.begin(), jumps.end(), 0L);
  out.heavy_tailed_boundary = excess_kurtosis(boundary) > 50.0;
  return out;
}

PositivityReport check_jump_positivity(const FitProcedure& proc, const SignalSpec& signal,
                                       long trials, std::uint64_t seed,
                                       const DecomposeOptions& options) {
  if (trials < 1) throw ArgumentError("need at least one trial");
  const Eigen::Index n = signal.size();
  std::vector<std::vector<JumpViolation>> per_trial(static_cast<std::size_t>(trials));
  std::vector<long> counts(static_cast<std::size_t>(trials), 0);

  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const Vector y = sample_response(signal, {seed, t});
    StreamRng pick({seed, auxiliary_stream(t, 2)});
    const int coord = static_cast<int>(pick() % static_cast<std::uint64_t>(n));
    const double mu_i = signal.mu()[coord];
    const auto found = scan_discontinuities(
        proc, coord, y, mu_i - options.scan_half_width * signal.sigma(),
        mu_i + options.scan_half_width * signal.sigma(), options.scan);
    counts[t] = static_cast<long>(found.size());
    for (const auto& j : found) {
      if (j.jump < 0.0) per_trial[t].push_back({static_cast<long>(t), coord, j});
    }
  });

  PositivityReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < per_trial.size(); ++t) {
    report.jumps_examined += counts[t];
    report.violations.insert(report.violations.end(), per_trial[t].begin(), per_trial[t].end());
  }
  return report;
}

}  // namespace dfsearch
