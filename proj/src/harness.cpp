#include "dfsearch/harness.hpp"

#include "dfsearch/closed_form.hpp"
#include "dfsearch/errors.hpp"
#include "dfsearch/fitters.hpp"
#include "dfsearch/model.hpp"
#include "dfsearch/monte_carlo.hpp"
#include "dfsearch/output.hpp"
#include "dfsearch/stein.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <set>

namespace dfsearch {

namespace fs = std::filesystem;

namespace {

constexpr const char* kBlue = "#1f77b4";
constexpr const char* kRed = "#d62728";
constexpr const char* kGreen = "#2ca02c";
constexpr const char* kGray = "#7f7f7f";

std::string num(double x) { return format_double(x); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

std::vector<ProcedureKind> parse_procedures(const std::vector<std::string>& names,
                                            const std::set<ProcedureKind>& allowed) {
  std::vector<ProcedureKind> out;
  for (const auto& name : names) {
    ProcedureKind kind;
    try {
      kind = procedure_kind_from_string(name);
    } catch (const ArgumentError&) {
      throw ConfigError("unknown procedure '" + name + "'");
    }
    require(allowed.count(kind) > 0, "procedure '" + name + "' is not supported here");
    out.push_back(kind);
  }
  require(!out.empty(), "no procedures requested");
  return out;
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  fs::path path(const std::string& name) {
    files_.push_back(dir_ / name);
    return files_.back();
  }
  std::vector<fs::path> files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

// ---------------------------------------------------------------------------
// curves

std::vector<fs::path> cmd_curves(Config& cfg, const fs::path& out_dir, bool svg) {
  const std::string regime = cfg.get_string("regime", "null");
  const long p = cfg.get_int("p", 100);
  const double sigma = cfg.get_double("sigma", 1.0);
  const double rho = cfg.get_double("rho", 1.0);
  const long k_star = cfg.get_int("k_star", 10);
  const double lambda_min = cfg.get_double("lambda_min", 0.0);
  const double lambda_max = cfg.get_double("lambda_max", 5.0);
  const double lambda_step = cfg.get_double("lambda_step", 1e-3);
  const long active_points = cfg.get_int("active_points", 199);
  // Closed forms draw nothing; a seed is accepted so every command takes --seed.
  if (cfg.has("seed")) cfg.get_int("seed", 0);
  cfg.expect("schema.curves", "dfsearch.curves.v1");
  cfg.expect("schema.curves_by_active", "dfsearch.curves_by_active.v1");
  cfg.reject_unknown();

  require(regime == "null" || regime == "sparse" || regime == "dense",
          "regime must be null, sparse or dense");
  require(p >= 1 && p <= 1000000, "p must be between 1 and 1e6");
  require(sigma > 0.0, "sigma must be positive");
  require(lambda_min >= 0.0 && lambda_max > lambda_min, "need 0 <= lambda_min < lambda_max");
  require(lambda_step > 0.0, "lambda_step must be positive");
  require((lambda_max - lambda_min) / lambda_step <= 1e7, "lambda grid too long");
  require(active_points >= 1 && active_points <= 1000000, "active_points out of range");
  if (regime == "sparse") require(k_star >= 0 && k_star <= p, "k_star must lie in [0, p]");

  Vector beta = Vector::Zero(p);
  if (regime == "sparse") beta.head(k_star).setConstant(rho);
  if (regime == "dense") beta.setConstant(rho);

  OutputSet out(out_dir);
  CsvTable by_lambda{{"procedure", "lambda", "t", "expected_active", "df", "sdf"}, {}};
  const long steps = static_cast<long>(std::floor((lambda_max - lambda_min) / lambda_step + 1e-9));
  SvgPlot lambda_plot{"closed-form curves (" + regime + ")", "lambda", "value", {}, false};
  for (const auto kind : {ProcedureKind::best_subset, ProcedureKind::relaxed_lasso}) {
    SvgSeries df_s{std::string(to_string(kind)) + " df", {}, {},
                   kind == ProcedureKind::best_subset ? kRed : kGreen};
    SvgSeries sdf_s{std::string(to_string(kind)) + " sdf", {}, {},
                    kind == ProcedureKind::best_subset ? "#ff9896" : "#98df8a"};
    for (long k = 0; k <= steps; ++k) {
      const double lambda = lambda_min + static_cast<double>(k) * lambda_step;
      const CurvePoint c = kind == ProcedureKind::best_subset
                               ? df_subset_orthogonal(beta, sigma, lambda)
                               : df_relaxed_lasso_orthogonal(beta, sigma, lambda);
      by_lambda.add_row({std::string(to_string(kind)), num(lambda), num(c.t),
                         num(c.expected_active), num(c.df), num(c.sdf)});
      df_s.x.push_back(lambda);
      df_s.y.push_back(c.df);
      sdf_s.x.push_back(lambda);
      sdf_s.y.push_back(c.sdf);
    }
    lambda_plot.series.push_back(std::move(df_s));
    lambda_plot.series.push_back(std::move(sdf_s));
  }

  CsvTable by_active{{"expected_active", "t", "lambda_subset", "lambda_relaxed_lasso",
                      "df_subset", "df_relaxed_lasso", "sdf_subset", "sdf_relaxed_lasso"},
                     {}};
  SvgPlot active_plot{"search degrees of freedom (" + regime + ")", "E|A|", "sdf", {}, false};
  SvgSeries sdf_active{"sdf", {}, {}, kRed};
  for (long k = 1; k <= active_points; ++k) {
    const double target = static_cast<double>(p) * static_cast<double>(k) /
                          static_cast<double>(active_points + 1);
    const double t = threshold_for_expected_active(beta, sigma, target);
    const CurvePoint s = df_subset_orthogonal(beta, sigma, subset_lambda_for_threshold(t));
    const CurvePoint r = df_relaxed_lasso_orthogonal(beta, sigma, lasso_lambda_for_threshold(t));
    by_active.add_row({num(target), num(t), num(s.lambda), num(r.lambda), num(s.df), num(r.df),
                       num(s.sdf), num(r.sdf)});
    sdf_active.x.push_back(s.expected_active);
    sdf_active.y.push_back(s.sdf);
  }
  active_plot.series.push_back(std::move(sdf_active));

  write_csv(out.path("curves.csv"), by_lambda);
  write_csv(out.path("curves_by_active.csv"), by_active);
  if (svg) {
    write_svg(out.path("curves.svg"), lambda_plot);
    write_svg(out.path("curves_by_active.svg"), active_plot);
  }
  return out.files();
}

// ---------------------------------------------------------------------------
// simulate

struct Preset {
  long n, p;
  std::vector<int> blocks;
  double corr_low, corr_high;
  std::vector<int> support;
  std::vector<std::string> procedures;
  bool with_sdf;
};

Preset preset_for(const std::string& name) {
  if (name == "blocks-20x10") return {20, 10, {4, 6}, 0.6, 0.9, {0, 1, 2, 3, 4}, {"lasso", "best-subset"}, false};
  if (name == "blocks-20x10-relaxed") {
    return {20, 10, {4, 6}, 0.6, 0.9, {0, 1, 2, 3, 4},
            {"lasso", "best-subset", "relaxed-lasso"}, true};
  }
  if (name == "blocks-30x16") return {30, 16, {8, 8}, 0.4, 0.9, {0, 1, 2, 8}, {"lasso", "best-subset"}, true};
  throw ConfigError("preset must be blocks-20x10, blocks-20x10-relaxed or blocks-30x16");
}

std::vector<fs::path> cmd_simulate(Config& cfg, const fs::path& out_dir, bool svg) {
  const Preset pre = preset_for(cfg.get_string("preset", "blocks-20x10"));
  const long n = cfg.get_int("n", pre.n);
  const long p = cfg.get_int("p", pre.p);
  const std::vector<int> blocks = cfg.get_ints("blocks", pre.blocks);
  const double corr_low = cfg.get_double("corr_low", pre.corr_low);
  const double corr_high = cfg.get_double("corr_high", pre.corr_high);
  const long design_seed = cfg.get_int("design_seed", 1);
  const std::string signal_kind = cfg.get_string("signal", "sparse");
  const std::vector<int> support = cfg.get_ints("support", pre.support);
  const double beta_value = cfg.get_double("beta_value", 1.0);
  const double sigma = cfg.get_double("sigma", 1.0);
  const auto procedures = parse_procedures(
      cfg.get_strings("procedures", pre.procedures),
      {ProcedureKind::lasso, ProcedureKind::best_subset, ProcedureKind::relaxed_lasso});
  const long reps = cfg.get_int("reps", 100);
  const long seed = cfg.get_int("seed", 2024);
  const bool with_sdf = cfg.get_bool("with_sdf", pre.with_sdf);
  const long lambda_count = cfg.get_int("lambda_count", 10);
  const double lambda_ratio = cfg.get_double("lambda_ratio", 0.01);
  const bool explicit_lambda = cfg.has("lambda");
  std::vector<double> lambda = cfg.get_doubles("lambda", {});
  const bool explicit_subset = cfg.has("subset_lambda");
  std::vector<double> subset_lambda = cfg.get_doubles("subset_lambda", {});
  cfg.expect("schema.simulate", "dfsearch.simulate.v1");
  cfg.reject_unknown();

  require(n >= 1 && p >= 1 && n <= 100000 && p <= 100000, "n and p must be positive");
  require(signal_kind == "null" || signal_kind == "sparse" || signal_kind == "dense",
          "signal must be null, sparse or dense");
  require(sigma > 0.0, "sigma must be positive");
  require(reps >= 2, "reps must be at least 2");
  require(seed >= 0 && design_seed >= 0, "seeds must be nonnegative");
  for (int j : support) require(j >= 0 && j < p, "support index out of range");
  const bool wants_subset = std::find(procedures.begin(), procedures.end(),
                                      ProcedureKind::best_subset) != procedures.end();
  if (wants_subset && p > kMaxSubsetPredictors) {
    throw CapacityError("best subset enumeration limited to p <= " +
                        std::to_string(kMaxSubsetPredictors) + " (got p = " +
                        std::to_string(p) + ")");
  }
  if (!explicit_lambda) require(lambda_count >= 1 && lambda_ratio > 0.0 && lambda_ratio < 1.0,
                                "lambda_count >= 1 and 0 < lambda_ratio < 1 required");

  std::shared_ptr<const DesignMatrix> design;
  try {
    design = std::make_shared<const DesignMatrix>(gen_block_design(
        static_cast<int>(n), static_cast<int>(p), blocks, corr_low, corr_high,
        {static_cast<std::uint64_t>(design_seed), 0}));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
  Vector beta = Vector::Zero(p);
  if (signal_kind == "sparse") {
    for (int j : support) beta[j] = beta_value;
  } else if (signal_kind == "dense") {
    beta.setConstant(beta_value);
  }
  const SignalSpec signal = SignalSpec::from_coefficients(*design, beta, sigma);

  if (!explicit_lambda) {
    double lmax = noiseless_lambda_max(*design, signal.mu());
    if (!(lmax > 0.0)) {
      // Null signal: fall back to the noise scale of the largest column.
      lmax = 3.0 * sigma * design->values().colwise().norm().maxCoeff();
    }
    lambda = log_lambda_grid(lmax, lambda_ratio, static_cast<int>(lambda_count));
  }
  if (!explicit_subset) {
    subset_lambda.clear();
    // Same threshold on the scale of a unit-norm column: a lasso penalty l
    // thresholds x_j'y at l, best subset thresholds it at |x_j| sqrt(2 lambda).
    const double col_norm = std::sqrt(design->values().colwise().squaredNorm().mean());
    for (double l : lambda) subset_lambda.push_back(subset_lambda_for_threshold(l / col_norm));
  }
  require(!lambda.empty() && !subset_lambda.empty(), "empty tuning grid");
  cfg.record("lambda", lambda);
  cfg.record("subset_lambda", subset_lambda);
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    require(lambda[k] >= 0.0 && (k == 0 || lambda[k] > lambda[k - 1]),
            "lambda must be nonnegative and strictly increasing");
  }
  for (std::size_t k = 0; k < subset_lambda.size(); ++k) {
    require(subset_lambda[k] >= 0.0 && (k == 0 || subset_lambda[k] > subset_lambda[k - 1]),
            "subset_lambda must be nonnegative and strictly increasing");
  }

  OutputSet out(out_dir);
  CsvTable table{{"procedure", "lambda", "mean_active", "df_hat", "se", "sdf_hat", "sdf_se"}, {}};
  SvgPlot plot{"degrees of freedom vs selected variables", "average number of selected variables",
               "estimated degrees of freedom", {}, true};
  for (const auto kind : procedures) {
    ExperimentGrid grid{kind,
                        kind == ProcedureKind::best_subset ? subset_lambda : lambda,
                        design,
                        signal,
                        reps,
                        static_cast<std::uint64_t>(seed),
                        with_sdf,
                        {}};
    const CurveTable rows = run_grid(grid);
    SvgSeries series{std::string(to_string(kind)), {}, {},
                     kind == ProcedureKind::lasso         ? kBlue
                     : kind == ProcedureKind::best_subset ? kRed
                                                          : kGreen,
                     true};
    for (const auto& r : rows) {
      table.add_row({std::string(to_string(kind)), num(r.lambda), num(r.mean_active),
                     num(r.df_hat), num(r.se), num(r.sdf_hat), num(r.sdf_se)});
      series.x.push_back(r.mean_active);
      series.y.push_back(r.df_hat);
    }
    plot.series.push_back(std::move(series));
  }
  write_csv(out.path("simulate.csv"), table);
  if (svg) write_svg(out.path("simulate.svg"), plot);
  return out.files();
}

// ---------------------------------------------------------------------------
// stein-check

double closed_form_df(ProcedureKind kind, const DesignMatrix& x, const SignalSpec& signal,
                      double lambda) {
  if (!x.orthogonal()) return std::numeric_limits<double>::quiet_NaN();
  const Vector xtmu = x.values().transpose() * signal.mu();
  switch (kind) {
    case ProcedureKind::hard_threshold:
      return df_hard_threshold(xtmu, signal.sigma(), lambda);
    case ProcedureKind::best_subset:
      return df_subset_orthogonal(xtmu, signal.sigma(), lambda).df;
    case ProcedureKind::relaxed_lasso:
      return df_relaxed_lasso_orthogonal(xtmu, signal.sigma(), lambda).df;
    case ProcedureKind::lasso:
    case ProcedureKind::soft_threshold:
      return expected_active_hard(xtmu, signal.sigma(), lambda);
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<fs::path> cmd_stein_check(Config& cfg, const fs::path& out_dir, bool /*svg*/) {
  const std::vector<double> mus = cfg.get_doubles("mus", {-2.0, 0.0, 3.0});
  const std::vector<double> sigmas = cfg.get_doubles("sigmas", {0.5, 1.0, 2.0});
  const std::vector<std::string> function_names = cfg.get_strings("functions", {"all"});
  const auto procedures = parse_procedures(
      cfg.get_strings("procedures", {"hard-threshold", "best-subset", "relaxed-lasso", "lasso"}),
      {ProcedureKind::hard_threshold, ProcedureKind::soft_threshold, ProcedureKind::best_subset,
       ProcedureKind::relaxed_lasso, ProcedureKind::lasso});
  const std::string design_kind = cfg.get_string("design", "orthogonal");
  const long n = cfg.get_int("n", 10);
  const long p = cfg.get_int("p", n);
  const std::vector<int> blocks = cfg.get_ints("blocks", {static_cast<int>(p)});
  const double corr_low = cfg.get_double("corr_low", 0.4);
  const double corr_high = cfg.get_double("corr_high", 0.9);
  const long design_seed = cfg.get_int("design_seed", 1);
  const double sigma = cfg.get_double("sigma", 1.0);
  const double mu_value = cfg.get_double("mu_value", 0.0);
  const double threshold = cfg.get_double("threshold", 1.0);
  const double subset_lambda = cfg.get_double("subset_lambda", 0.5);
  const double lasso_lambda = cfg.get_double("lasso_lambda", 1.0);
  const long reps = cfg.get_int("reps", 200);
  const long seed = cfg.get_int("seed", 2024);
  const long positivity_trials = cfg.get_int("positivity_trials", 0);
  cfg.expect("schema.stein_univariate", "dfsearch.stein_univariate.v1");
  cfg.expect("schema.stein_decompose", "dfsearch.stein_decompose.v1");
  cfg.expect("schema.stein_positivity", "dfsearch.stein_positivity.v1");
  cfg.reject_unknown();

  for (double s : sigmas) require(s > 0.0, "sigmas must be positive");
  require(sigma > 0.0, "sigma must be positive");
  require(design_kind == "orthogonal" || design_kind == "block",
          "design must be orthogonal or block");
  require(n >= 1 && p >= 1 && n <= 10000 && p <= 10000, "n and p must be positive");
  require(reps >= 2, "reps must be at least 2");
  require(positivity_trials >= 0, "positivity_trials must be nonnegative");
  require(seed >= 0 && design_seed >= 0, "seeds must be nonnegative");
  require(threshold >= 0.0 && subset_lambda >= 0.0 && lasso_lambda >= 0.0,
          "tuning values must be nonnegative");
  const bool wants_subset = std::find(procedures.begin(), procedures.end(),
                                      ProcedureKind::best_subset) != procedures.end();
  if (wants_subset && p > kMaxSubsetPredictors) {
    throw CapacityError("best subset enumeration limited to p <= " +
                        std::to_string(kMaxSubsetPredictors));
  }

  std::vector<PiecewiseScalarFunction> functions;
  const auto library = builtin_function_library();
  const bool all = std::find(function_names.begin(), function_names.end(), "all") !=
                   function_names.end();
  for (const auto& f : library) {
    if (all || std::find(function_names.begin(), function_names.end(), f.name()) !=
                   function_names.end()) {
      functions.push_back(f);
    }
  }
  for (const auto& name : function_names) {
    if (name == "all") continue;
    const bool known = std::any_of(library.begin(), library.end(),
                                   [&](const auto& f) { return f.name() == name; });
    require(known, "unknown function '" + name + "'");
  }

  std::shared_ptr<const DesignMatrix> design;
  try {
    design = std::make_shared<const DesignMatrix>(
        design_kind == "orthogonal"
            ? gen_orthogonal_design(static_cast<int>(n), static_cast<int>(p))
            : gen_block_design(static_cast<int>(n), static_cast<int>(p), blocks, corr_low,
                               corr_high, {static_cast<std::uint64_t>(design_seed), 0}));
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
  const SignalSpec signal(Vector::Constant(n, mu_value), sigma);

  OutputSet out(out_dir);
  CsvTable uni{{"case", "mu", "sigma", "lhs", "rhs", "residual"}, {}};
  for (const auto& f : functions) {
    for (double mu : mus) {
      for (double s : sigmas) {
        const double lhs = stein_lhs_univariate(f, mu, s);
        const double rhs = stein_rhs_univariate(f, mu, s);
        uni.add_row({f.name(), num(mu), num(s), num(lhs), num(rhs), num(std::abs(lhs - rhs))});
      }
    }
  }

  CsvTable dec{{"procedure", "lambda", "divergence", "divergence_se", "boundary", "boundary_se",
                "total", "total_se", "df_hat", "df_se", "closed_form", "mean_active", "jumps",
                "heavy_tailed"},
               {}};
  CsvTable pos{{"procedure", "lambda", "trials", "jumps_examined", "violations"}, {}};
  for (const auto kind : procedures) {
    const double lambda = kind == ProcedureKind::hard_threshold ? threshold
                          : kind == ProcedureKind::best_subset  ? subset_lambda
                                                                : lasso_lambda;
    const FitProcedure proc(kind, lambda, design);
    const auto useed = static_cast<std::uint64_t>(seed);
    const SteinDecomposition d = stein_decompose_df(proc, signal, reps, useed);
    const DfEstimate df = estimate_df(proc, signal, reps, useed);
    if (d.heavy_tailed_boundary) {
      std::cerr << "warning: " << to_string(kind)
                << ": boundary term is heavy-tailed across replications; its SE is unreliable\n";
    }
    dec.add_row({std::string(to_string(kind)), num(lambda), num(d.divergence),
                 num(d.divergence_se), num(d.boundary), num(d.boundary_se), num(d.total),
                 num(d.total_se), num(df.value),
                 num(df.std_error), num(closed_form_df(kind, *design, signal, lambda)),
                 num(d.mean_active), std::to_string(d.jumps_found),
                 d.heavy_tailed_boundary ? "true" : "false"});
    if (positivity_trials > 0) {
      const PositivityReport r = check_jump_positivity(proc, signal, positivity_trials, useed);
      pos.add_row({std::string(to_string(kind)), num(lambda), std::to_string(r.trials),
                   std::to_string(r.jumps_examined), std::to_string(r.violations.size())});
    }
  }

  write_csv(out.path("stein_univariate.csv"), uni);
  write_csv(out.path("stein_decompose.csv"), dec);
  if (positivity_trials > 0) write_csv(out.path("stein_positivity.csv"), pos);
  return out.files();
}

}  // namespace

std::vector<fs::path> run_command(const std::string& command, Config& config,
                                  const fs::path& out_dir) {
  config.expect("command", command);
  const bool svg = config.get_bool("svg", false);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + out_dir.string());

  std::vector<fs::path> files;
  if (command == "curves") {
    files = cmd_curves(config, out_dir, svg);
  } else if (command == "simulate") {
    files = cmd_simulate(config, out_dir, svg);
  } else if (command == "stein-check") {
    files = cmd_stein_check(config, out_dir, svg);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  const fs::path sidecar = out_dir / "resolved-config.txt";
  write_text(sidecar, config.resolved_text());
  files.push_back(sidecar);
  return files;
}

}  // namespace dfsearch
