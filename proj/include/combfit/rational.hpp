#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "combfit/exact_frequency.hpp"

namespace combfit {

// Exact rational number with a 128-bit numerator and positive denominator,
// always stored in lowest terms. Operations throw overflow_error rather than
// lose precision.
class Rational {
 public:
  Rational() = default;
  Rational(wide_int numerator, wide_int denominator = 1);

  // Parses a decimal such as "1.0528718331489904380" or "2.5e-3" exactly.
  static Rational parse_decimal(std::string_view text);

  wide_int numerator() const { return num_; }
  wide_int denominator() const { return den_; }

  Rational inverse() const;
  Rational operator*(const Rational& rhs) const;
  Rational operator/(const Rational& rhs) const { return *this * rhs.inverse(); }
  Rational operator-() const;

  // Rounded to `significant_digits` (half away from zero). Fixed notation for
  // magnitudes in [1e-5, 1e digits), scientific otherwise.
  std::string to_decimal(int significant_digits = 20) const;
  long double to_long_double() const;
  std::string to_string() const;  // "num/den"

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  wide_int num_ = 0;
  wide_int den_ = 1;
};

}  // namespace combfit
