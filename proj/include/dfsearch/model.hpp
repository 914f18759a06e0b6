#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dfsearch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// n x p predictor matrix. Immutable after construction.
///
/// When `orthogonal` is set the constructor checks max|X'X - I| <= 1e-10.
class DesignMatrix {
 public:
  DesignMatrix(Matrix values, bool orthogonal = false, std::string label = {});

  const Matrix& values() const noexcept { return values_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  bool orthogonal() const noexcept { return orthogonal_; }
  const std::string& label() const noexcept { return label_; }

 private:
  Matrix values_;
  bool orthogonal_;
  std::string label_;
};

/// True mean, noise level, and (optionally) the coefficients generating it.
class SignalSpec {
 public:
  SignalSpec(Vector mu, double sigma);

  /// mu = X * beta_star.
  static SignalSpec from_coefficients(const DesignMatrix& design, Vector beta_star, double sigma);

  const Vector& mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  const std::optional<Vector>& beta_star() const noexcept { return beta_star_; }
  Eigen::Index size() const noexcept { return mu_.size(); }

  /// Indices of nonzero beta_star entries; empty without beta_star.
  std::vector<int> true_support() const;

 private:
  Vector mu_;
  double sigma_;
  std::optional<Vector> beta_star_;
};

/// Identifies one reproducible random stream.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Counter-based 64-bit generator: output k of stream (seed, id) is
/// mix(key(seed, id) + k * gamma). Streams are independent of one another and
/// cheap to construct, so every replication gets its own.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(const RngSpec& spec);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  double uniform();          // [0, 1)
  double uniform(double lo, double hi);
  double normal();           // standard normal

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream id reserved for an auxiliary draw paired with replication `r`
/// (e.g. the independent test response in the optimism estimate).
std::uint64_t auxiliary_stream(std::uint64_t r, std::uint64_t tag);

/// Rows i.i.d. N(0, Sigma), Sigma block diagonal with unit diagonal and
/// within-block off-diagonals ~ U[corr_low, corr_high].
///
/// A non positive definite Sigma is repaired by adding tau*I with the
/// smallest tau in {1e-8 * 2^k} giving a smallest eigenvalue >= 1e-6.
DesignMatrix gen_block_design(int n, int p, const std::vector<int>& block_sizes, double corr_low,
                              double corr_high, const RngSpec& rng);

/// The covariance used by gen_block_design for the same arguments (after any
/// repair). Exposed for tests and reporting.
Matrix block_covariance(int p, const std::vector<int>& block_sizes, double corr_low,
                        double corr_high, StreamRng& rng);

/// First p columns of the n x n identity.
DesignMatrix gen_orthogonal_design(int n, int p);

/// y = mu + sigma * z.
Vector sample_response(const SignalSpec& spec, const RngSpec& rng);

}  // namespace dfsearch
