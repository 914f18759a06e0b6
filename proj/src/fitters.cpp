#include "dfsearch/fitters.hpp"

#include "dfsearch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfsearch {

namespace {

std::vector<int> nonzero_indices(const Vector& beta) {
  std::vector<int> out;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

int column_rank(const Matrix& x, const std::vector<int>& cols) {
  if (cols.empty()) return 0;
  Matrix sub(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < cols.size(); ++a) sub.col(static_cast<Eigen::Index>(a)) = x.col(cols[a]);
  return static_cast<int>(Eigen::ColPivHouseholderQR<Matrix>(sub).rank());
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("tuning parameter must be finite and nonnegative");
  }
}

void check_response(const DesignMatrix& x, const Vector& y) {
  if (y.size() != x.rows()) throw ArgumentError("response length does not match design rows");
}

FitOutput from_beta(const DesignMatrix& x, const Vector& y, Vector beta) {
  FitOutput out;
  out.active_set = nonzero_indices(beta);
  out.fitted = x.values() * beta;
  out.beta = std::move(beta);
  out.objective = 0.5 * (y - out.fitted).squaredNorm();
  return out;
}

}  // namespace

std::string_view to_string(ProcedureKind kind) {
  switch (kind) {
    case ProcedureKind::least_squares_on_support: return "least-squares-on-support";
    case ProcedureKind::lasso: return "lasso";
    case ProcedureKind::best_subset: return "best-subset";
    case ProcedureKind::relaxed_lasso: return "relaxed-lasso";
    case ProcedureKind::ridge: return "ridge";
    case ProcedureKind::hard_threshold: return "hard-threshold";
    case ProcedureKind::soft_threshold: return "soft-threshold";
  }
  return "unknown";
}

ProcedureKind procedure_kind_from_string(std::string_view name) {
  for (auto kind : {ProcedureKind::least_squares_on_support, ProcedureKind::lasso,
                    ProcedureKind::best_subset, ProcedureKind::relaxed_lasso, ProcedureKind::ridge,
                    ProcedureKind::hard_threshold, ProcedureKind::soft_threshold}) {
    if (to_string(kind) == name) return kind;
  }
  throw ArgumentError("unknown procedure '" + std::string(name) + "'");
}

Vector soft_threshold(const Vector& v, double t) {
  if (!(t >= 0.0)) throw ArgumentError("threshold must be nonnegative");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - t;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

Vector hard_threshold(const Vector& v, double t) {
  if (!(t >= 0.0)) throw ArgumentError("threshold must be nonnegative");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::abs(v[i]) >= t ? v[i] : 0.0;
  return out;
}

FitOutput least_squares_on_support(const DesignMatrix& x, const Vector& y,
                                   const std::vector<int>& support) {
  check_response(x, y);
  std::vector<int> cols = support;
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  for (int j : cols) {
    if (j < 0 || j >= x.cols()) throw ArgumentError("support index out of range");
  }

  Vector beta = Vector::Zero(x.cols());
  int rank = 0;
  if (!cols.empty()) {
    Matrix sub(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t a = 0; a < cols.size(); ++a) {
      sub.col(static_cast<Eigen::Index>(a)) = x.values().col(cols[a]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
    const Vector coef = cod.solve(y);
    for (std::size_t a = 0; a < cols.size(); ++a) beta[cols[a]] = coef[static_cast<Eigen::Index>(a)];
    rank = static_cast<int>(cod.rank());
  }
  FitOutput out = from_beta(x, y, std::move(beta));
  out.rank = rank;
  return out;
}

namespace detail {

long lasso_cd(const Matrix& gram, const Vector& xty, double lambda, const LassoOptions& options,
              Vector& beta) {
  const Eigen::Index p = gram.rows();
  if (beta.size() != p) beta = Vector::Zero(p);
  // grad = X'y - X'X beta
  Vector grad = xty - gram * beta;
  for (long sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double gjj = gram(j, j);
      if (gjj <= 0.0) continue;
      const double z = grad[j] + gjj * beta[j];
      const double mag = std::abs(z) - lambda;
      const double next = mag > 0.0 ? std::copysign(mag, z) / gjj : 0.0;
      const double delta = next - beta[j];
      if (delta != 0.0) {
        grad.noalias() -= delta * gram.col(j);
        beta[j] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (max_change < options.tolerance) return sweep;
  }
  return -1;
}

FitOutput lasso_from_gram(const DesignMatrix& x, const Matrix& gram, const Vector& y,
                          double lambda, const LassoOptions& options) {
  check_lambda(lambda);
  check_response(x, y);
  Vector beta = Vector::Zero(x.cols());
  const Vector xty = x.values().transpose() * y;
  if (lasso_cd(gram, xty, lambda, options, beta) < 0) {
    const double kkt = lasso_kkt_residual(x, y, beta, lambda);
    std::ostringstream os;
    os << "lasso coordinate descent did not converge in " << options.max_sweeps
       << " sweeps (KKT residual " << kkt << ")";
    throw ConvergenceError(os.str(), kkt);
  }
  FitOutput out = from_beta(x, y, std::move(beta));
  out.objective += lambda * out.beta.lpNorm<1>();
  out.rank = column_rank(x.values(), out.active_set);
  return out;
}

}  // namespace detail

FitOutput lasso_solve(const DesignMatrix& x, const Vector& y, double lambda,
                      const LassoOptions& options) {
  const Matrix gram = x.values().transpose() * x.values();
  return detail::lasso_from_gram(x, gram, y, lambda, options);
}

double lasso_kkt_residual(const DesignMatrix& x, const Vector& y, const Vector& beta,
                          double lambda) {
  const Vector corr = x.values().transpose() * (y - x.values() * beta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double v = beta[j] != 0.0 ? std::abs(corr[j] - std::copysign(lambda, beta[j]))
                                    : std::max(0.0, std::abs(corr[j]) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

FitOutput best_subset_solve(const DesignMatrix& x, const Vector& y, double lambda) {
  check_lambda(lambda);
  check_response(x, y);
  if (x.cols() > kMaxSubsetPredictors) {
    throw CapacityError("best subset enumeration limited to p <= 25");
  }
  const Matrix gram = x.values().transpose() * x.values();
  FitOutput out =
      least_squares_on_support(x, y, detail::best_subset_support(x.values(), gram, y, lambda));
  out.objective += lambda * static_cast<double>(out.active_set.size());
  return out;
}

FitOutput relaxed_lasso_fit(const DesignMatrix& x, const Vector& y, double lambda,
                            const LassoOptions& options) {
  const FitOutput lasso = lasso_solve(x, y, lambda, options);
  return least_squares_on_support(x, y, lasso.active_set);
}

FitOutput ridge_fit(const DesignMatrix& x, const Vector& y, double lambda) {
  check_response(x, y);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ArgumentError("ridge requires a positive tuning parameter");
  }
  Matrix system = x.values().transpose() * x.values();
  system.diagonal().array() += lambda;
  Vector beta = system.llt().solve(x.values().transpose() * y);
  FitOutput out;
  out.fitted = x.values() * beta;
  out.objective = 0.5 * (y - out.fitted).squaredNorm() + 0.5 * lambda * beta.squaredNorm();
  out.beta = std::move(beta);
  out.active_set.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) out.active_set[static_cast<std::size_t>(j)] = static_cast<int>(j);
  out.rank = column_rank(x.values(), out.active_set);
  return out;
}

FitProcedure::FitProcedure(ProcedureKind kind, double lambda,
                           std::shared_ptr<const DesignMatrix> design, std::vector<int> support,
                           LassoOptions lasso_options)
    : kind_(kind),
      lambda_(lambda),
      design_(std::move(design)),
      support_(std::move(support)),
      lasso_options_(lasso_options) {
  if (!design_) throw ArgumentError("procedure requires a design");
  check_lambda(lambda_);
  if (kind_ == ProcedureKind::ridge && !(lambda_ > 0.0)) {
    throw ArgumentError("ridge requires a positive tuning parameter");
  }
  if (kind_ == ProcedureKind::best_subset && design_->cols() > kMaxSubsetPredictors) {
    throw CapacityError("best subset enumeration limited to p <= 25");
  }
  gram_ = std::make_shared<const Matrix>(design_->values().transpose() * design_->values());
}

FitProcedure FitProcedure::with_lambda(double lambda) const {
  FitProcedure copy = *this;
  check_lambda(lambda);
  copy.lambda_ = lambda;
  return copy;
}

FitOutput FitProcedure::fit(const Vector& y) const {
  const DesignMatrix& x = *design_;
  switch (kind_) {
    case ProcedureKind::least_squares_on_support:
      return least_squares_on_support(x, y, support_);
    case ProcedureKind::lasso:
      return detail::lasso_from_gram(x, *gram_, y, lambda_, lasso_options_);
    case ProcedureKind::best_subset: {
      check_response(x, y);
      FitOutput out = least_squares_on_support(
          x, y, detail::best_subset_support(x.values(), *gram_, y, lambda_));
      out.objective += lambda_ * static_cast<double>(out.active_set.size());
      return out;
    }
    case ProcedureKind::relaxed_lasso: {
      const FitOutput lasso = detail::lasso_from_gram(x, *gram_, y, lambda_, lasso_options_);
      return least_squares_on_support(x, y, lasso.active_set);
    }
    case ProcedureKind::ridge:
      return ridge_fit(x, y, lambda_);
    case ProcedureKind::hard_threshold:
    case ProcedureKind::soft_threshold: {
      check_response(x, y);
      const Vector xty = x.values().transpose() * y;
      FitOutput out = from_beta(x, y,
                                kind_ == ProcedureKind::hard_threshold
                                    ? hard_threshold(xty, lambda_)
                                    : soft_threshold(xty, lambda_));
      out.rank = column_rank(x.values(), out.active_set);
      return out;
    }
  }
  throw ArgumentError("unhandled procedure kind");
}

CoordinateMap FitProcedure::coordinate_map(const Vector& y, int i) const {
  if (i < 0 || i >= y.size()) throw ArgumentError("coordinate out of range");
  if (kind_ == ProcedureKind::best_subset) {
    check_response(*design_, y);
    return detail::best_subset_coordinate_map(design_->values(), *gram_, y, i, lambda_);
  }
  return [self = *this, yy = Vector(y), i](double s) mutable {
    yy[i] = s;
    return self.fit(yy).fitted[i];
  };
}

}  // namespace dfsearch
