#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ldiag {

enum class ErrorCode {
  // input
  MalformedRow,
  DuplicateCell,
  EmptyYear,
  InvalidPanel,
  // numerical
  Separation,
  NoConvergence,
  SingularHessian,
  NotPositiveDefinite,
  SingularCovariance,
  ZeroVariance,
  TooManyFailures,
  EmptyIntersection,
  DegenerateMarginal,
  DegenerateResiduals,
  // usage
  DomainError,
  InvalidArgument,
  ConfigError,
};

enum class ErrorCategory { Input, Numerical, Config };

std::string_view error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] ErrorCategory category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

/// Cholesky breakdown; carries the failing pivot position.
class NotPositiveDefiniteError : public Error {
 public:
  NotPositiveDefiniteError(std::size_t pivot_index, double pivot, double max_pivot)
      : Error(ErrorCode::NotPositiveDefinite,
              "matrix is not positive definite at pivot " + std::to_string(pivot_index)),
        pivot_index_(pivot_index),
        pivot_(pivot),
        max_pivot_(max_pivot) {}

  [[nodiscard]] std::size_t pivot_index() const noexcept { return pivot_index_; }
  [[nodiscard]] double pivot() const noexcept { return pivot_; }
  [[nodiscard]] double max_pivot() const noexcept { return max_pivot_; }

 private:
  std::size_t pivot_index_;
  double pivot_;
  double max_pivot_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ldiag
