#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace combfit {

// Signed 128-bit integer used for every exact frequency quantity.
using wide_int = __int128;

std::string to_decimal_string(wide_int value);

// A frequency held as an integer count of millihertz.
//
// The 128-bit representation covers roughly +/-1.7e35 Hz, so optical
// frequencies near 1e15 Hz keep full millihertz resolution with a lot of
// headroom. Addition, subtraction and integer scaling are exact and throw
// overflow_error instead of wrapping. Division never rounds silently: divmod()
// returns a floor quotient together with the remainder.
class ExactFrequency {
 public:
  static constexpr wide_int quanta_per_hz = 1000;

  constexpr ExactFrequency() = default;

  static constexpr ExactFrequency from_millihertz(wide_int mhz) { return ExactFrequency(mhz); }
  static ExactFrequency from_hz(std::int64_t hz);
  // Nearest millihertz; for convenience in simulations, never for ingestion.
  static ExactFrequency from_hz_rounded(double hz);
  // Parses "[+-]digits[.digits][e[+-]digits]" in Hz. Rejects values that are
  // not an exact multiple of 1 mHz.
  static ExactFrequency parse(std::string_view text);

  constexpr wide_int millihertz() const { return mhz_; }
  double hz() const { return static_cast<double>(mhz_) / 1000.0; }

  // Decimal Hz with exactly three fractional digits, "-" only when negative.
  std::string to_string() const;

  ExactFrequency operator-() const;
  ExactFrequency operator+(ExactFrequency rhs) const;
  ExactFrequency operator-(ExactFrequency rhs) const;
  ExactFrequency& operator+=(ExactFrequency rhs) { return *this = *this + rhs; }
  ExactFrequency& operator-=(ExactFrequency rhs) { return *this = *this - rhs; }
  ExactFrequency scaled(wide_int factor) const;

  struct DivMod;
  // Floor division: *this == quotient * divisor + remainder with the
  // remainder in [0, divisor) for positive divisors.
  DivMod divmod(ExactFrequency divisor) const;

  ExactFrequency abs() const { return mhz_ < 0 ? -*this : *this; }
  int sign() const { return (mhz_ > 0) - (mhz_ < 0); }

  friend constexpr auto operator<=>(ExactFrequency, ExactFrequency) = default;

 private:
  constexpr explicit ExactFrequency(wide_int mhz) : mhz_(mhz) {}
  wide_int mhz_ = 0;
};

struct ExactFrequency::DivMod {
  wide_int quotient;
  ExactFrequency remainder;
};

inline ExactFrequency operator*(wide_int k, ExactFrequency f) { return f.scaled(k); }
inline ExactFrequency operator*(ExactFrequency f, wide_int k) { return f.scaled(k); }

// Checked helpers shared by the exact-arithmetic types.
wide_int checked_add(wide_int a, wide_int b);
wide_int checked_mul(wide_int a, wide_int b);

}  // namespace combfit
