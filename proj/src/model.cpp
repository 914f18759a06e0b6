#include "dfsearch/model.hpp"

#include "dfsearch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dfsearch {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

DesignMatrix::DesignMatrix(Matrix values, bool orthogonal, std::string label)
    : values_(std::move(values)), orthogonal_(orthogonal), label_(std::move(label)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ArgumentError("design matrix must have at least one row and one column");
  }
  if (!values_.allFinite()) {
    throw ArgumentError("design matrix has non-finite entries");
  }
  if (orthogonal_) {
    const Matrix gram = values_.transpose() * values_;
    const double dev =
        (gram - Matrix::Identity(values_.cols(), values_.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-10) {
      std::ostringstream os;
      os << "design flagged orthogonal but max|X'X - I| = " << dev;
      throw ArgumentError(os.str());
    }
  }
}

SignalSpec::SignalSpec(Vector mu, double sigma) : mu_(std::move(mu)), sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw ArgumentError("sigma must be positive and finite");
  }
  if (mu_.size() < 1 || !mu_.allFinite()) {
    throw ArgumentError("mean vector must be non-empty and finite");
  }
}

SignalSpec SignalSpec::from_coefficients(const DesignMatrix& design, Vector beta_star,
                                         double sigma) {
  if (beta_star.size() != design.cols()) {
    throw ArgumentError("beta_star length does not match design columns");
  }
  SignalSpec spec(design.values() * beta_star, sigma);
  spec.beta_star_ = std::move(beta_star);
  return spec;
}

std::vector<int> SignalSpec::true_support() const {
  std::vector<int> support;
  if (!beta_star_) return support;
  for (Eigen::Index j = 0; j < beta_star_->size(); ++j) {
    if ((*beta_star_)[j] != 0.0) support.push_back(static_cast<int>(j));
  }
  return support;
}

StreamRng::StreamRng(const RngSpec& spec)
    : key_(mix64(spec.seed + kGamma) ^ mix64(spec.stream_id * 0xd1b54a32d192ed03ULL + 1)) {}

StreamRng::result_type StreamRng::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double StreamRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double StreamRng::normal() { return normal_(*this); }

std::uint64_t auxiliary_stream(std::uint64_t r, std::uint64_t tag) {
  return r ^ (mix64(tag + 0x5851f42d4c957f2dULL) | (1ULL << 63));
}

Matrix block_covariance(int p, const std::vector<int>& block_sizes, double corr_low,
                        double corr_high, StreamRng& rng) {
  Matrix sigma = Matrix::Identity(p, p);
  int start = 0;
  for (int size : block_sizes) {
    for (int a = start; a < start + size; ++a) {
      for (int b = a + 1; b < start + size; ++b) {
        const double r = rng.uniform(corr_low, corr_high);
        sigma(a, b) = r;
        sigma(b, a) = r;
      }
    }
    start += size;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig >= 1e-6) return sigma;

  for (int k = 0; k <= 80; ++k) {
    const double tau = 1e-8 * std::ldexp(1.0, k);
    if (min_eig + tau >= 1e-6) {
      sigma.diagonal().array() += tau;
      return sigma;
    }
  }
  throw ConstructionError("block covariance could not be repaired to positive definite");
}

DesignMatrix gen_block_design(int n, int p, const std::vector<int>& block_sizes, double corr_low,
                              double corr_high, const RngSpec& rng) {
  if (n < 1 || p < 1) throw ArgumentError("block design needs n >= 1 and p >= 1");
  if (block_sizes.empty() ||
      std::any_of(block_sizes.begin(), block_sizes.end(), [](int b) { return b < 1; }) ||
      std::accumulate(block_sizes.begin(), block_sizes.end(), 0) != p) {
    throw ArgumentError("block sizes must be positive and sum to p");
  }
  if (!(corr_low >= 0.0 && corr_low <= corr_high && corr_high < 1.0)) {
    throw ArgumentError("correlation range must satisfy 0 <= low <= high < 1");
  }

  StreamRng gen(rng);
  const Matrix sigma = block_covariance(p, block_sizes, corr_low, corr_high, gen);
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw ConstructionError("block covariance is not positive definite after repair");
  }

  Matrix z(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(i, j) = gen.normal();
  }
  const Matrix l = llt.matrixL();
  Matrix x = z * l.transpose();

  std::ostringstream label;
  label << "block(n=" << n << ",p=" << p << ",corr=[" << corr_low << "," << corr_high << "])";
  return DesignMatrix(std::move(x), false, label.str());
}

DesignMatrix gen_orthogonal_design(int n, int p) {
  if (p < 1 || n < 1) throw ArgumentError("orthogonal design needs n >= 1 and p >= 1");
  if (p > n) throw ArgumentError("orthogonal design requires p <= n");
  return DesignMatrix(Matrix::Identity(n, p), true, "orthogonal");
}

Vector sample_response(const SignalSpec& spec, const RngSpec& rng) {
  StreamRng gen(rng);
  Vector y(spec.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = spec.mu()[i] + spec.sigma() * gen.normal();
  return y;
}

}  // namespace dfsearch
