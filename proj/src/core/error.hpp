#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stoat {

// Numeric values are part of the C API and the CLI exit-code contract.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kDegenerateInput = 3,
  kInsufficientData = 4,
  kEstimation = 5,
  kNonstationary = 6,
  kDivergence = 7,
  kParse = 8,
  kIo = 9,
  kAlignment = 10,
  kGeneratorInstability = 11,
  kInternal = 12,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace stoat
