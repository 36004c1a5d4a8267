#include "ldiag/error.hpp"

namespace ldiag {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::EmptyYear: return "EmptyYear";
    case ErrorCode::InvalidPanel: return "InvalidPanel";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::DegenerateMarginal: return "DegenerateMarginal";
    case ErrorCode::DegenerateResiduals: return "DegenerateResiduals";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow:
    case ErrorCode::DuplicateCell:
    case ErrorCode::EmptyYear:
    case ErrorCode::InvalidPanel:
      return ErrorCategory::Input;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::DomainError:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Numerical;
  }
}

}  // namespace ldiag
