#pragma once

#include <stdexcept>
#include <string>

namespace opf {

enum class ErrorCode {
  InvalidInput,
  InvalidConfig,
  NumericalSingularity,
  InsufficientHistory,
  DegenerateUpdate,
  NoCandidate,
  UnknownObject,
};

const char* to_string(ErrorCode code);

/// Exception type for every recoverable failure in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace opf
