// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dfsearch/closed_form.hpp"
#include "dfsearch/config.hpp"
#include "dfsearch/fitters.hpp"
#include "dfsearch/harness.hpp"
#include "dfsearch/model.hpp"
#include "dfsearch/monte_carlo.hpp"
#include "dfsearch/stein.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace dfsearch;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Appends a printf-style fragment to `o.detail`, and fails `o` unless `ok`.
void note(Outcome& o, bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
void note(Outcome& o, bool ok, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += buf;
  if (!ok) {
    o.detail += " [x]";
    o.pass = false;
  }
}

const double kPhi1 = std::exp(-0.5) / std::sqrt(2.0 * M_PI);

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double boost_integral(const std::function<double(double)>& f, const std::vector<double>& edges) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    if (!(edges[k + 1] > edges[k])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, edges[k],
                                                                         edges[k + 1], 20, 1e-15);
  }
  return total;
}

Vector constant(int p, double v) { return Vector::Constant(p, v); }

std::shared_ptr<const DesignMatrix> orthogonal(int n) {
  return std::make_shared<const DesignMatrix>(gen_orthogonal_design(n, n));
}

std::shared_ptr<const DesignMatrix> blocks(int n, int p, const std::vector<int>& sizes,
                                           double lo, double hi, std::uint64_t seed) {
  return std::make_shared<const DesignMatrix>(gen_block_design(n, p, sizes, lo, hi, {seed, 0}));
}

// Threshold sweep of the orthogonal best-subset closed form.
struct Sweep {
  std::vector<CurvePoint> pts;
};

Sweep subset_sweep(const Vector& mu, double t_max, double step) {
  Sweep s;
  const long steps = static_cast<long>(std::floor(t_max / step + 1e-9));
  s.pts.reserve(static_cast<std::size_t>(steps + 1));
  for (long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * step;
    s.pts.push_back(df_subset_orthogonal(mu, 1.0, subset_lambda_for_threshold(t)));
  }
  return s;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  double best = -1.0, best_lambda = 0.0;
  for (long k = 0; k <= 50000; ++k) {
    const double lambda = static_cast<double>(k) * 1e-4;
    const double v = sdf_null(100, 1.0, lambda);
    if (v > best) {
      best = v;
      best_lambda = lambda;
    }
  }
  const double active =
      expected_active_hard(Vector::Zero(100), 1.0, std::sqrt(2.0 * best_lambda));
  note(o, std::abs(best_lambda - 0.5) <= 1e-3, "lambda* = %.4f (0.5 +- 1e-3)", best_lambda);
  note(o, std::abs(active - 31.73) <= 0.01, "E|A| = %.4f (31.73 +- 0.01)", active);
  return o;
}

Outcome criterion2() {
  Outcome o;
  double null_peak = 0.0;
  for (long k = 0; k <= 50000; ++k) {
    null_peak = std::max(null_peak, sdf_null(100, 1.0, static_cast<double>(k) * 1e-4));
  }
  note(o, std::abs(null_peak - 200.0 * kPhi1) <= 1e-3 && std::abs(null_peak - 48.394) <= 1e-3,
       "null peak %.5f (2p phi(1) = %.5f)", null_peak, 200.0 * kPhi1);

  const auto peak = [](const Sweep& s) {
    return *std::max_element(s.pts.begin(), s.pts.end(),
                             [](const CurvePoint& a, const CurvePoint& b) { return a.sdf < b.sdf; });
  };
  const Sweep d1 = subset_sweep(constant(100, 1.0), 6.0, 1e-4);
  const CurvePoint p1 = peak(d1);
  note(o, std::abs(p1.sdf - 56.0) <= 1.0, "dense rho=1 peak %.3f (56 +- 1)", p1.sdf);
  note(o, std::abs(p1.expected_active - 29.4) <= 0.2, "at E|A| = %.3f (29.4 +- 0.2)",
       p1.expected_active);

  const Sweep d8 = subset_sweep(constant(100, 8.0), 14.0, 1e-4);
  const CurvePoint p8 = peak(d8);
  note(o, std::abs(p8.expected_active - 45.2) <= 0.2, "dense rho=8 peak at E|A| = %.3f (45.2 +- 0.2)",
       p8.expected_active);
  const CurvePoint near50 = *std::min_element(
      d8.pts.begin(), d8.pts.end(), [](const CurvePoint& a, const CurvePoint& b) {
        return std::abs(a.expected_active - 50.0) < std::abs(b.expected_active - 50.0);
      });
  note(o, near50.df > 300.0, "df %.2f at E|A| = %.3f (> 300)", near50.df, near50.expected_active);
  return o;
}

// (1/sigma^2) Cov(H_t(y), y) for one coordinate, by quadrature.
double hard_df_quadrature(double mu, double sigma, double t) {
  const auto f = [&](double y) {
    return std::abs(y) >= t ? y * (y - mu) * phi((y - mu) / sigma) / (sigma * sigma * sigma) : 0.0;
  };
  std::vector<double> edges{mu - 40.0 * sigma};
  for (double e : {-t, t}) {
    if (e > edges.back() && e < mu + 40.0 * sigma) edges.push_back(e);
  }
  edges.push_back(mu + 40.0 * sigma);
  return boost_integral(f, edges);
}

Outcome criterion3() {
  Outcome o;
  const int n = 50;
  const double t = 1.0;
  double worst = 0.0;
  const double closed = df_hard_threshold(Vector::Zero(n), 1.0, t);
  worst = std::abs(closed - n * hard_df_quadrature(0.0, 1.0, t));
  StreamRng rng({31, 0});
  for (int k = 0; k < 10; ++k) {
    Vector mu(n);
    for (int i = 0; i < n; ++i) mu[i] = rng.uniform(-4.0, 4.0);
    const double sigma = rng.uniform(0.3, 2.5), tt = rng.uniform(0.0, 4.0);
    double quad = 0.0;
    for (int i = 0; i < n; ++i) quad += hard_df_quadrature(mu[i], sigma, tt);
    worst = std::max(worst, std::abs(df_hard_threshold(mu, sigma, tt) - quad));
  }
  note(o, worst <= 1e-8, "closed form vs quadrature max |diff| %.2e (<= 1e-8)", worst);

  const FitProcedure proc(ProcedureKind::hard_threshold, t, orthogonal(n));
  const DfEstimate mc = estimate_df(proc, SignalSpec(Vector::Zero(n), 1.0), 10000, 2024);
  const double z = (mc.value - closed) / mc.std_error;
  note(o, std::abs(z) <= 3.0, "MC %.4f +- %.4f vs %.4f (z = %.2f)", mc.value, mc.std_error, closed,
       z);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto x = blocks(20, 10, {4, 6}, 0.6, 0.9, 1);
  Vector beta = Vector::Zero(10);
  beta.head(5).setOnes();
  const SignalSpec signal = SignalSpec::from_coefficients(*x, beta, 1.0);
  ExperimentGrid grid{ProcedureKind::lasso,
                      log_lambda_grid(noiseless_lambda_max(*x, signal.mu()), 0.01, 10),
                      x,
                      signal,
                      10000,
                      2024,
                      false,
                      {}};
  const CurveTable rows = run_grid(grid);
  double worst = 0.0;
  int bad = 0;
  for (const auto& r : rows) {
    const double z = (r.df_hat - r.mean_active) / r.se;
    worst = std::max(worst, std::abs(z));
    bad += std::abs(z) > 3.0;
  }
  note(o, rows.size() == 10 && bad == 0, "%zu lambdas, max |df - E|A||/SE = %.2f (<= 3)",
       rows.size(), worst);
  return o;
}

Outcome criterion5() {
  Outcome o;
  const int n = 10;
  const auto x = orthogonal(n);
  std::vector<double> grid;
  for (double t : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}) {
    grid.push_back(subset_lambda_for_threshold(t));
  }
  Vector sparse = Vector::Zero(n);
  sparse.head(4) << 4.0, 3.0, 2.0, 1.0;
  for (const auto& [name, mu] : {std::pair<const char*, Vector>{"mu=0", Vector::Zero(n)},
                                 std::pair<const char*, Vector>{"sparse", sparse}}) {
    const SignalSpec signal(mu, 1.0);
    ExperimentGrid g{ProcedureKind::best_subset, grid, x, signal, 10000, 2024, false, {}};
    const CurveTable rows = run_grid(g);
    double worst = 0.0;
    for (const auto& r : rows) {
      const double closed = df_subset_orthogonal(mu, 1.0, r.lambda).df;
      worst = std::max(worst, std::abs(r.df_hat - closed) / r.se);
    }
    note(o, rows.size() == 8 && worst <= 3.0, "%s: max |MC - closed|/SE = %.2f over %zu lambdas",
         name, worst, rows.size());
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  Vector sparse = Vector::Zero(100);
  sparse.head(10).setConstant(8.0);
  for (const auto& [name, mu] : {std::pair<const char*, Vector>{"null", Vector::Zero(100)},
                                 std::pair<const char*, Vector>{"sparse rho=8", sparse},
                                 std::pair<const char*, Vector>{"dense rho=2", constant(100, 2.0)}}) {
    double worst_sdf = 0.0, worst_active = 0.0;
    int points = 0;
    for (int k = 1; k <= 50; ++k) {
      const double target = 100.0 * k / 51.0;
      const double t = threshold_for_expected_active(mu, 1.0, target);
      const CurvePoint s = df_subset_orthogonal(mu, 1.0, subset_lambda_for_threshold(t));
      const CurvePoint r = df_relaxed_lasso_orthogonal(mu, 1.0, lasso_lambda_for_threshold(t));
      worst_active = std::max({worst_active, std::abs(s.expected_active - target),
                               std::abs(r.expected_active - target)});
      worst_sdf = std::max(worst_sdf, std::abs(s.sdf - r.sdf));
      ++points;
    }
    note(o, points == 50 && worst_sdf <= 1e-9 && worst_active <= 1e-9,
         "%s: max |sdf diff| %.1e, max |E|A| - target| %.1e", name, worst_sdf, worst_active);
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  const auto x = blocks(10, 6, {3, 3}, 0.4, 0.9, 7);
  Vector beta = Vector::Zero(6);
  beta.head(2) << 1.5, -1.0;
  const SignalSpec signal = SignalSpec::from_coefficients(*x, beta, 1.0);
  for (const auto kind : {ProcedureKind::lasso, ProcedureKind::best_subset}) {
    const FitProcedure proc(kind, 1.0, x);
    const OptimismEstimate e = estimate_optimism(proc, signal, 10000, 2024);
    const double se = std::hypot(e.optimism_se, e.two_sigma2_df_se);
    const double z = (e.optimism - e.two_sigma2_df) / se;
    note(o, std::abs(z) <= 3.0, "%s: optimism %.3f vs 2 sigma^2 df %.3f (z = %.2f)",
         std::string(to_string(kind)).c_str(), e.optimism, e.two_sigma2_df, z);
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  double worst = 0.0;
  int cases = 0;
  for (const auto& f : builtin_function_library()) {
    for (double mu : {-2.0, 0.0, 3.0}) {
      for (double sigma : {0.5, 1.0, 2.0}) {
        worst = std::max(worst, verify_stein_univariate(f, mu, sigma));
        ++cases;
      }
    }
  }
  note(o, worst <= 1e-8, "library: %d cases, max residual %.1e (<= 1e-8)", cases, worst);

  double worst_ht = 0.0;
  for (double t : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    const PiecewiseScalarFunction h = hard_threshold_function(t);
    for (double mu : {-2.0, 0.0, 0.7, 3.0}) {
      for (double sigma : {0.5, 1.0, 2.0}) {
        const double closed = df_hard_threshold(Vector::Constant(1, mu), sigma, t);
        worst_ht = std::max({worst_ht, std::abs(stein_lhs_univariate(h, mu, sigma) - closed),
                             std::abs(stein_rhs_univariate(h, mu, sigma) - closed)});
      }
    }
  }
  note(o, worst_ht <= 1e-8, "hard threshold vs closed form max |diff| %.1e (<= 1e-8)", worst_ht);
  return o;
}

Outcome criterion9() {
  Outcome o;
  const auto total_vs_mc = [&](const char* name, const FitProcedure& proc,
                               const SignalSpec& signal, long reps) {
    const SteinDecomposition d = stein_decompose_df(proc, signal, reps, 2024);
    const DfEstimate mc = estimate_df(proc, signal, 10000, 4048);
    const double se = std::hypot(d.total_se, mc.std_error);
    const double z = (d.total - mc.value) / se;
    note(o, std::abs(z) <= 3.0,
         "%s: divergence %.4f + boundary %.4f = %.4f vs MC %.4f (z = %.2f)", name, d.divergence,
         d.boundary, d.total, mc.value, z);
  };
  total_vs_mc("hard threshold n=10",
              FitProcedure(ProcedureKind::hard_threshold, 1.0, orthogonal(10)),
              SignalSpec(Vector::Zero(10), 1.0), 2000);
  Vector mu = Vector::Zero(8);
  mu.head(3) << 3.0, 1.5, -1.0;
  total_vs_mc("best subset X=I n=p=8",
              FitProcedure(ProcedureKind::best_subset, subset_lambda_for_threshold(1.0),
                           orthogonal(8)),
              SignalSpec(mu, 1.0), 1000);

  const auto x = blocks(12, 6, {3, 3}, 0.4, 0.9, 3);
  Vector beta = Vector::Zero(6);
  beta.head(2) << 1.0, 1.0;
  const SignalSpec signal = SignalSpec::from_coefficients(*x, beta, 1.0);
  for (const auto& [kind, reps] : {std::pair{ProcedureKind::best_subset, 300L},
                                   std::pair{ProcedureKind::relaxed_lasso, 150L}}) {
    const SteinDecomposition d = stein_decompose_df(FitProcedure(kind, 1.0, x), signal, reps, 99);
    const double gap = std::abs(d.divergence - d.mean_active);
    note(o, gap <= 3.0 * d.divergence_se + 1e-6, "%s: divergence %.6f vs E|A| %.6f (%ld reps)",
         std::string(to_string(kind)).c_str(), d.divergence, d.mean_active, reps);
  }
  return o;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

Outcome criterion10() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "dfsearch_acceptance_blocks";
  std::filesystem::remove_all(dir);
  std::istringstream text("preset=blocks-30x16\nreps=100\nseed=2024\n");
  Config config = Config::parse(text);
  run_command("simulate", config, dir);
  const auto rows = read_rows(dir / "simulate.csv");
  // procedure, lambda, mean_active, df_hat, se, sdf_hat, sdf_se
  std::vector<std::pair<double, double>> lasso, subset;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::pair<double, double> v{std::strtod(rows[r][5].c_str(), nullptr),
                                      std::strtod(rows[r][6].c_str(), nullptr)};
    (rows[r][0] == "lasso" ? lasso : subset).push_back(v);
  }
  if (lasso.size() != 10 || subset.size() != 10) {
    note(o, false, "expected 10 grid points per procedure, got %zu and %zu", lasso.size(),
         subset.size());
    return o;
  }
  int dominated = 0, positive = 0;
  for (std::size_t k = 0; k < 10; ++k) {
    dominated += subset[k].first >= lasso[k].first - 3.0 * std::hypot(subset[k].second,
                                                                        lasso[k].second);
    if (k > 0 && k < 9) positive += subset[k].first > 0.0 && lasso[k].first > 0.0;
  }
  note(o, dominated >= 7, "subset sdf >= lasso sdf - 3 SE at %d of 10 points (>= 7)", dominated);
  note(o, positive == 8, "both sdf > 0 at %d of 8 interior points", positive);
  return o;
}

Outcome criterion11() {
  Outcome o;
  StreamRng rng({11, 0});
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double a = rng.uniform(-4, 4), b = rng.uniform(-4, 4), s = rng.uniform(0.2, 3.0);
    const auto dens = [s](double z) { return phi(z / s) / s; };
    const TruncatedMoments m = truncated_moments(a, b, s);
    const double lo = -40.0 * s, hi = 40.0 * s;
    worst = std::max(
        {worst,
         std::abs(m.first_below - boost_integral([&](double z) { return z * dens(z); }, {lo, a})),
         std::abs(m.first_above - boost_integral([&](double z) { return z * dens(z); }, {b, hi})),
         std::abs(m.second_below -
                  boost_integral([&](double z) { return z * z * dens(z); }, {lo, a})),
         std::abs(m.second_above -
                  boost_integral([&](double z) { return z * z * dens(z); }, {b, hi}))});
  }
  note(o, worst <= 1e-10, "20 triples, max |diff| %.1e (<= 1e-10)", worst);
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  Outcome (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "null sdf maximizer", 1.0, criterion1},
      {2, "peak values", 5.0, criterion2},
      {3, "hard threshold df: closed form, quadrature, Monte Carlo", 30.0, criterion3},
      {4, "lasso df equals expected active set size", 300.0, criterion4},
      {5, "best subset df on X=I against closed form", 600.0, criterion5},
      {6, "subset and relaxed lasso sdf at matched E|A|", 1.0, criterion6},
      {7, "optimism identity", 300.0, criterion7},
      {8, "univariate extended Stein suite", 10.0, criterion8},
      {9, "multivariate divergence + boundary decomposition", 1200.0, criterion9},
      {10, "n=30, p=16 correlated design: subset vs lasso sdf", 1800.0, criterion10},
      {11, "truncated normal moments", 1.0, criterion11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds >= c.limit_seconds) {
      o.pass = false;
      char buf[96];
      std::snprintf(buf, sizeof buf, "; runtime over the %.0f s limit", c.limit_seconds);
      o.detail += buf;
    }
    failed += !o.pass;
    std::printf("criterion %2d %s: %s (%.2f s) -- %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
