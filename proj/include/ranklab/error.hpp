#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ranklab {

enum class ErrorCode {
  CutTooSmall,
  NegativeSpacer,
  LengthMismatch,
  StageUnavailable,
  StageTooLow,
  ParamOutOfRange,
  ScheduleInfeasible,
  PreconditionViolated,
  HorizonExceeded,
  NoPartnerStages,
  BudgetExceeded,
  HypothesisUnmet,
  Overflow,
  UsageError,
  IoError,
  InvalidSpec,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Checked 64-bit arithmetic. Heights in every construction fit comfortably in
// int64 for the stage ranges we evaluate; anything that does not is an error.
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, "integer addition overflow");
  return out;
}

inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_sub_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, "integer subtraction overflow");
  return out;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, "integer multiplication overflow");
  return out;
}

inline std::int64_t checked_pow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

}  // namespace ranklab
