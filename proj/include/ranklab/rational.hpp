#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace ranklab {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational in lowest terms with a positive denominator.
///
/// Measures are nonnegative; ratios reported by certificates (for example
/// (h_n - 2 max D) / max D) may be negative, so the sign is not restricted
/// here. Use is_nonnegative() where a measure is expected.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : value_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(const BigInt& num, const BigInt& den);

  static Rational of(std::int64_t num, std::int64_t den) { return Rational(BigInt(num), BigInt(den)); }

  BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  BigInt denominator() const { return boost::multiprecision::denominator(value_); }

  bool is_zero() const { return value_ == 0; }
  bool is_nonnegative() const { return value_ >= 0; }

  Rational operator+(const Rational& o) const { return Rational(value_ + o.value_); }
  Rational operator-(const Rational& o) const { return Rational(value_ - o.value_); }
  Rational operator*(const Rational& o) const { return Rational(value_ * o.value_); }
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }

  bool operator==(const Rational& o) const { return value_ == o.value_; }
  std::strong_ordering operator<=>(const Rational& o) const {
    if (value_ < o.value_) return std::strong_ordering::less;
    if (value_ > o.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  /// "num/den", or just "num" when the denominator is 1.
  std::string str() const;
  /// Non-authoritative decimal rendering with the given number of digits.
  std::string approx(int digits = 12) const;
  double to_double() const;

 private:
  using Value = boost::multiprecision::cpp_rational;
  explicit Rational(Value v) : value_(std::move(v)) {}
  Value value_{0};
};

Rational pow(const Rational& base, int exp);

/// A measure known up to an interval: `confirmed` is exact mass already
/// decided to lie in the set, `unresolved` is mass not yet decidable at the
/// evaluation stage. The true value lies in [confirmed, confirmed + unresolved].
struct MeasureInterval {
  Rational confirmed;
  Rational unresolved;

  Rational lower() const { return confirmed; }
  Rational upper() const { return confirmed + unresolved; }
  bool exact() const { return unresolved.is_zero(); }
  bool operator==(const MeasureInterval&) const = default;
};

}  // namespace ranklab
