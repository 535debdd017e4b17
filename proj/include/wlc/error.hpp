#pragma once

#include <stdexcept>
#include <string>

namespace wlc {

/// Failure categories shared by every module. The numeric values are part of
/// the C ABI (see wlc/wlc.h) and must not be reordered.
enum class ErrorCode : int {
  kInvalidSequence = 1,
  kSize = 2,
  kInvalidMatrix = 3,
  kNumeric = 4,
  kDivergence = 5,
  kNoPeriod = 6,
  kCalibrationRange = 7,
  kCalibrationFailure = 8,
  kDegenerateRegression = 9,
  kInternalInvariant = 10,
  kNonConvergence = 11,
  kDegeneratePath = 12,
  kWindow = 13,
  kInvalidConfig = 14,
  kUnknownPreset = 15,
  kIo = 16,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when an integrated state leaves the admissible box or turns
/// non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(double time, const std::string& what)
      : Error(ErrorCode::kDivergence, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace wlc
