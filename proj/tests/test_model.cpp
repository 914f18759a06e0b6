#include "dfsearch/errors.hpp"
#include "dfsearch/model.hpp"

#include <doctest.h>

#include <cmath>

using namespace dfsearch;

namespace {

double corr(const Vector& a, const Vector& b) {
  const Vector ac = a.array() - a.mean();
  const Vector bc = b.array() - b.mean();
  return ac.dot(bc) / (ac.norm() * bc.norm());
}

}  // namespace

TEST_CASE("design matrix validation") {
  CHECK_THROWS_AS(DesignMatrix(Matrix(0, 3)), ArgumentError);
  Matrix bad = Matrix::Identity(3, 3);
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(DesignMatrix{bad}, ArgumentError);
  Matrix skew = Matrix::Identity(3, 2);
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS((DesignMatrix{skew, true}), ArgumentError);
  CHECK_NOTHROW((DesignMatrix{skew, false}));
}

TEST_CASE("signal spec") {
  CHECK_THROWS_AS(SignalSpec(Vector::Zero(3), 0.0), ArgumentError);
  CHECK_THROWS_AS(SignalSpec(Vector::Zero(3), -1.0), ArgumentError);
  const DesignMatrix x(Matrix::Random(5, 3));
  Vector beta(3);
  beta << 1.0, 0.0, -2.0;
  const SignalSpec s = SignalSpec::from_coefficients(x, beta, 1.5);
  CHECK((s.mu() - x.values() * beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.true_support() == std::vector<int>{0, 2});
  CHECK(s.sigma() == 1.5);
  CHECK(SignalSpec(Vector::Zero(2), 1.0).true_support().empty());
}

TEST_CASE("orthogonal design") {
  const DesignMatrix i100 = gen_orthogonal_design(100, 100);
  CHECK(i100.orthogonal());
  CHECK((i100.values() - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff() == 0.0);
  const DesignMatrix col = gen_orthogonal_design(3, 1);
  CHECK(col.values().col(0).norm() == doctest::Approx(1.0).epsilon(1e-15));
  for (auto [n, p] : {std::pair{7, 3}, std::pair{5, 5}, std::pair{12, 1}}) {
    const Matrix o = gen_orthogonal_design(n, p).values();
    CHECK((o.transpose() * o - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(gen_orthogonal_design(3, 4), ArgumentError);
}

TEST_CASE("block design argument checks") {
  CHECK_THROWS_AS(gen_block_design(10, 5, {2, 2}, 0.1, 0.2, {1, 0}), ArgumentError);
  CHECK_THROWS_AS(gen_block_design(10, 4, {2, 2}, 0.5, 0.2, {1, 0}), ArgumentError);
  CHECK_THROWS_AS(gen_block_design(10, 4, {2, 2}, 0.1, 1.0, {1, 0}), ArgumentError);
  CHECK_THROWS_AS(gen_block_design(0, 4, {2, 2}, 0.1, 0.2, {1, 0}), ArgumentError);
  CHECK_THROWS_AS(gen_block_design(10, 4, {0, 4}, 0.1, 0.2, {1, 0}), ArgumentError);
}

TEST_CASE("block design shape and determinism") {
  const DesignMatrix a = gen_block_design(30, 16, {8, 8}, 0.4, 0.9, {7, 0});
  const DesignMatrix b = gen_block_design(30, 16, {8, 8}, 0.4, 0.9, {7, 0});
  CHECK(a.rows() == 30);
  CHECK(a.cols() == 16);
  CHECK_FALSE(a.orthogonal());
  CHECK(a.values() == b.values());
  const DesignMatrix c = gen_block_design(30, 16, {8, 8}, 0.4, 0.9, {8, 0});
  CHECK(a.values() != c.values());
}

TEST_CASE("block covariance structure") {
  StreamRng rng({3, 0});
  const Matrix s = block_covariance(16, {8, 8}, 0.4, 0.9, rng);
  // Any repair shifts the whole diagonal by one tau from {0} u {1e-8 * 2^k}.
  const double tau = s(0, 0) - 1.0;
  CHECK(tau >= 0.0);
  if (tau > 0.0) {
    const double k = std::log2(tau / 1e-8);
    CHECK(std::abs(k - std::round(k)) <= 1e-9);
  }
  for (int i = 0; i < 16; ++i) {
    CHECK(s(i, i) == 1.0 + tau);
    for (int j = 0; j < 16; ++j) {
      CHECK(s(i, j) == s(j, i));
      if (i == j) continue;
      if ((i < 8) == (j < 8)) {
        CHECK(s(i, j) >= 0.4);
        CHECK(s(i, j) <= 0.9);
      } else {
        CHECK(s(i, j) == 0.0);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  CHECK(eig.eigenvalues().minCoeff() >= 1e-6 - 1e-12);
  // tau is the smallest grid value that works.
  if (tau > 1e-8) {
    Matrix less = s;
    less.diagonal().array() -= tau / 2.0;
    Eigen::SelfAdjointEigenSolver<Matrix> e2(less);
    CHECK(e2.eigenvalues().minCoeff() < 1e-6);
  }
}

TEST_CASE("positive definite draws are left alone") {
  StreamRng rng({4, 0});
  const Matrix s = block_covariance(4, {2, 2}, 0.2, 0.6, rng);
  CHECK(s.diagonal() == Vector::Ones(4));
}

TEST_CASE("block covariance repair keeps positive definiteness") {
  // Draws in a wide range on a large block are often indefinite.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    StreamRng rng({seed, 0});
    const Matrix s = block_covariance(12, {12}, 0.0, 0.99, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    CHECK(eig.eigenvalues().minCoeff() >= 1e-6 - 1e-12);
  }
}

TEST_CASE("block design empirical correlations") {
  const DesignMatrix x = gen_block_design(2000, 4, {2, 2}, 0.5, 0.5, {11, 0});
  CHECK(std::abs(corr(x.values().col(0), x.values().col(1)) - 0.5) <= 0.05);
  CHECK(std::abs(corr(x.values().col(2), x.values().col(3)) - 0.5) <= 0.05);

  const DesignMatrix big = gen_block_design(5000, 16, {8, 8}, 0.4, 0.9, {12, 0});
  for (int i = 0; i < 8; ++i) {
    for (int j = 8; j < 16; ++j) {
      CHECK(std::abs(corr(big.values().col(i), big.values().col(j))) <= 0.05);
    }
  }
  StreamRng rng({12, 0});
  const Matrix sigma = block_covariance(16, {8, 8}, 0.4, 0.9, rng);
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      const double target = sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
      CHECK(std::abs(corr(big.values().col(i), big.values().col(j)) - target) <= 0.05);
    }
  }

  const DesignMatrix iid = gen_block_design(5000, 3, {3}, 0.0, 0.0, {13, 0});
  CHECK(std::abs(corr(iid.values().col(0), iid.values().col(2))) <= 0.05);
}

TEST_CASE("stream generator") {
  StreamRng a({42, 5});
  StreamRng b({42, 5});
  for (int k = 0; k < 100; ++k) CHECK(a() == b());
  StreamRng u({1, 1});
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
  CHECK(auxiliary_stream(3, 1) != 3);
  CHECK(auxiliary_stream(3, 1) != auxiliary_stream(3, 2));
  CHECK(auxiliary_stream(3, 1) != auxiliary_stream(4, 1));
}

TEST_CASE("sample response") {
  const SignalSpec spec(Vector::LinSpaced(5, -1.0, 1.0), 2.0);
  const Vector y1 = sample_response(spec, {9, 4});
  const Vector y2 = sample_response(spec, {9, 4});
  CHECK(y1 == y2);
  CHECK(y1 != sample_response(spec, {9, 5}));
  CHECK(y1 != sample_response(spec, {10, 4}));

  const SignalSpec tiny(Vector::LinSpaced(5, -1.0, 1.0), 1e-300);
  CHECK((sample_response(tiny, {1, 1}) - tiny.mu()).cwiseAbs().maxCoeff() <= 1e-290);
}

TEST_CASE("sample response moments and stream independence") {
  const long draws = 100000;
  const SignalSpec spec(Vector::Zero(3), 1.0);
  Vector sum = Vector::Zero(3);
  for (long r = 0; r < draws; ++r) {
    sum += sample_response(spec, {5, static_cast<std::uint64_t>(r)});
  }
  const Vector mean = sum / static_cast<double>(draws);
  CHECK(mean.cwiseAbs().maxCoeff() <= 4.0 / std::sqrt(static_cast<double>(draws)));

  const SignalSpec wide(Vector::Zero(10000), 1.0);
  const Vector a = sample_response(wide, {5, 0});
  const Vector b = sample_response(wide, {5, 1});
  CHECK(std::abs(corr(a, b)) < 0.05);
  CHECK(std::abs(a.mean()) < 0.05);
  CHECK(std::abs(a.squaredNorm() / 10000.0 - 1.0) < 0.05);
}
