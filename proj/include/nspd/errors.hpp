#pragma once

#include <stdexcept>
#include <string>

namespace nspd {

// Bad dimensions, malformed files, out-of-range arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameter combinations that void a convergence guarantee.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long iteration, const std::string& what)
      : std::runtime_error(what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

class InnerSolverError : public std::runtime_error {
 public:
  InnerSolverError(double residual, const std::string& what)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class CertificateUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two reference solvers disagreed or failed to certify optimality.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedMetric : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nspd
