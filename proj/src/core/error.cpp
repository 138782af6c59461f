#include "error.hpp"

namespace stoat {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kEstimation: return "estimation";
    case ErrorCode::kNonstationary: return "nonstationary";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kAlignment: return "alignment";
    case ErrorCode::kGeneratorInstability: return "generator-instability";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace stoat
