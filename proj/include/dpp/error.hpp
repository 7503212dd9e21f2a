#pragma once

#include <stdexcept>
#include <string>

namespace dpp {

// Error categories double as process exit codes for the CLI:
// 2 usage, 3 data/geometry, 4 numeric/convergence.
enum class ErrorCategory : int {
  usage = 2,
  data = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }
  int exit_code() const { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

// Bad identifiers, out-of-range requests, malformed call arguments.
class InvalidArgumentError : public Error {
 public:
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorCategory::usage, what) {}
};

// Malformed configs or option combinations.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::usage, what) {}
};

// Unparseable or semantically invalid input files / problem instances.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorCategory::data, what) {}
};

// Degenerate geometry (collinear generators, empty clip regions, ...).
class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what)
      : Error(ErrorCategory::data, what) {}
};

// Contract violations between modules; indicates a bug, not bad user input.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what)
      : Error(ErrorCategory::data, what) {}
};

// Iteration failed to reach tolerance; carries the last residual seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorCategory::numeric, what),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// Non-finite intermediate; optionally carries the offending quantity's name.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}

  NumericError(const std::string& what, std::string context)
      : Error(ErrorCategory::numeric, what + " (" + context + ")"),
        context_(std::move(context)) {}

  const std::string& context() const { return context_; }

 private:
  std::string context_;
};

}  // namespace dpp
