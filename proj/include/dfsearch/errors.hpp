#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfsearch {

// Base of every error the library throws. The category determines the CLI
// exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { argument, config, capacity, numerical };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(Category::argument, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what) : Error(Category::capacity, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(Category::numerical, what) {}
};

// Covariance matrix could not be made positive definite.
class ConstructionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Coordinate descent did not meet its tolerance; carries the KKT residual of
// the last iterate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double kkt_residual)
      : NumericalError(what), kkt_residual_(kkt_residual) {}
  double kkt_residual() const noexcept { return kkt_residual_; }

 private:
  double kkt_residual_;
};

class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double achieved_error)
      : NumericalError(what), achieved_error_(achieved_error) {}
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

class ScanError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A fit failed inside a Monte Carlo loop. The original message is kept and
// the failing replication index attached.
class ReplicationError : public Error {
 public:
  ReplicationError(Category category, const std::string& what, std::size_t replication)
      : Error(category, what), replication_(replication) {}
  std::size_t replication() const noexcept { return replication_; }

 private:
  std::size_t replication_;
};

// Process exit code for an error category: 2 config/argument, 3 capacity,
// 4 numerical failure.
int exit_code_for(const Error& e) noexcept;

}  // namespace dfsearch
