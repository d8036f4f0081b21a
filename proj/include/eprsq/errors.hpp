#pragma once

#include <stdexcept>
#include <string>

namespace eprsq {

enum class ErrorKind {
  InvalidArgument,
  InconsistentState,
  AboveThreshold,
  NumericalSingularity,
  DegenerateConditioning,
  FitFailure,
  Pole,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Numerical failures map to CLI exit code 2, everything else to 1.
bool is_numerical(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the "<kind>: " prefix that what() carries.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace eprsq
