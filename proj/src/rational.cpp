#include "ranklab/rational.hpp"

#include "ranklab/error.hpp"

#include <sstream>

namespace ranklab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CutTooSmall: return "CutTooSmall";
    case ErrorCode::NegativeSpacer: return "NegativeSpacer";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::StageUnavailable: return "StageUnavailable";
    case ErrorCode::StageTooLow: return "StageTooLow";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::ScheduleInfeasible: return "ScheduleInfeasible";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::NoPartnerStages: return "NoPartnerStages";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::HypothesisUnmet: return "HypothesisUnmet";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

Rational::Rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error(ErrorCode::PreconditionViolated, "zero denominator");
  value_ = den < 0 ? Value(BigInt(-num), BigInt(-den)) : Value(num, den);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.value_ == 0) throw Error(ErrorCode::PreconditionViolated, "division by zero");
  return Rational(value_ / o.value_);
}

std::string Rational::str() const {
  auto num = numerator();
  auto den = denominator();
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string Rational::approx(int digits) const {
  std::ostringstream out;
  out.precision(digits);
  out << to_double();
  return out.str();
}

double Rational::to_double() const { return value_.convert_to<double>(); }

Rational pow(const Rational& base, int exp) {
  Rational out(1);
  if (exp >= 0) {
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
  }
  for (int i = 0; i < -exp; ++i) out *= base;
  return Rational(1) / out;
}

}  // namespace ranklab
