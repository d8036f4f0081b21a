#include "eprsq/errors.hpp"

namespace eprsq {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InconsistentState: return "inconsistent-state";
    case ErrorKind::AboveThreshold: return "above-threshold";
    case ErrorKind::NumericalSingularity: return "numerical-singularity";
    case ErrorKind::DegenerateConditioning: return "degenerate-conditioning";
    case ErrorKind::FitFailure: return "fit-failure";
    case ErrorKind::Pole: return "pole";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NumericalSingularity:
    case ErrorKind::DegenerateConditioning:
    case ErrorKind::FitFailure:
    case ErrorKind::Pole:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

}  // namespace eprsq
