#include "combfit/exact_frequency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "combfit/errors.hpp"

namespace combfit {

namespace {

using uwide = unsigned __int128;

wide_int pow10(int exponent) {
  wide_int result = 1;
  for (int i = 0; i < exponent; ++i) {
    result = checked_mul(result, 10);
  }
  return result;
}

}  // namespace

std::string to_decimal_string(wide_int value) {
  if (value == 0) {
    return "0";
  }
  const bool negative = value < 0;
  uwide magnitude = negative ? uwide(0) - uwide(value) : uwide(value);
  std::string digits;
  while (magnitude != 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(magnitude % 10)));
    magnitude /= 10;
  }
  if (negative) {
    digits.push_back('-');
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

wide_int checked_add(wide_int a, wide_int b) {
  wide_int out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw overflow_error("exact arithmetic overflow in addition");
  }
  return out;
}

wide_int checked_mul(wide_int a, wide_int b) {
  wide_int out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw overflow_error("exact arithmetic overflow in multiplication");
  }
  return out;
}

ExactFrequency ExactFrequency::from_hz(std::int64_t hz) {
  return ExactFrequency(checked_mul(hz, quanta_per_hz));
}

ExactFrequency ExactFrequency::from_hz_rounded(double hz) {
  if (!std::isfinite(hz) || std::fabs(hz) > 1e30) {
    throw domain_error("frequency not representable: " + std::to_string(hz));
  }
  return ExactFrequency(static_cast<wide_int>(std::round(hz * 1000.0)));
}

ExactFrequency ExactFrequency::parse(std::string_view text) {
  const std::string original(text);
  auto fail = [&](const std::string& why) -> ExactFrequency {
    throw input_error("invalid frequency '" + original + "': " + why);
  };

  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }

  wide_int mantissa = 0;
  int digit_count = 0;
  int fraction_digits = 0;
  bool seen_point = false;
  try {
    for (; pos < text.size(); ++pos) {
      const char ch = text[pos];
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        mantissa = checked_add(checked_mul(mantissa, 10), ch - '0');
        ++digit_count;
        if (seen_point) {
          ++fraction_digits;
        }
      } else if (ch == '.' && !seen_point) {
        seen_point = true;
      } else {
        break;
      }
    }
  } catch (const overflow_error&) {
    return fail("too many digits");
  }
  if (digit_count == 0) {
    return fail("no digits");
  }

  int exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    int exp_digits = 0;
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      exponent = exponent * 10 + (text[pos] - '0');
      ++exp_digits;
      if (exponent > 100) {
        return fail("exponent out of range");
      }
    }
    if (exp_digits == 0) {
      return fail("empty exponent");
    }
    if (exp_negative) {
      exponent = -exponent;
    }
  }
  if (pos != text.size()) {
    return fail("trailing characters");
  }

  // Scale to millihertz: value_mHz = mantissa * 10^(exponent - fraction_digits + 3).
  const int scale = exponent - fraction_digits + 3;
  wide_int mhz = 0;
  try {
    if (scale >= 0) {
      mhz = checked_mul(mantissa, pow10(scale));
    } else if (mantissa != 0) {
      if (-scale > 38) {
        return fail("finer than 1 mHz resolution");
      }
      const wide_int divisor = pow10(-scale);
      if (mantissa % divisor != 0) {
        return fail("finer than 1 mHz resolution");
      }
      mhz = mantissa / divisor;
    }
  } catch (const overflow_error&) {
    return fail("out of representable range");
  }
  return ExactFrequency(negative ? -mhz : mhz);
}

std::string ExactFrequency::to_string() const {
  const bool negative = mhz_ < 0;
  const uwide magnitude = negative ? uwide(0) - uwide(mhz_) : uwide(mhz_);
  const auto whole = static_cast<wide_int>(magnitude / 1000);
  const int frac = static_cast<int>(magnitude % 1000);
  std::string out = negative ? "-" : "";
  out += to_decimal_string(whole);
  out += '.';
  out += static_cast<char>('0' + frac / 100);
  out += static_cast<char>('0' + (frac / 10) % 10);
  out += static_cast<char>('0' + frac % 10);
  return out;
}

ExactFrequency ExactFrequency::operator-() const { return ExactFrequency(checked_mul(mhz_, -1)); }

ExactFrequency ExactFrequency::operator+(ExactFrequency rhs) const {
  return ExactFrequency(checked_add(mhz_, rhs.mhz_));
}

ExactFrequency ExactFrequency::operator-(ExactFrequency rhs) const { return *this + (-rhs); }

ExactFrequency ExactFrequency::scaled(wide_int factor) const {
  return ExactFrequency(checked_mul(mhz_, factor));
}

ExactFrequency::DivMod ExactFrequency::divmod(ExactFrequency divisor) const {
  if (divisor.mhz_ == 0) {
    throw domain_error("division by zero frequency");
  }
  wide_int q = mhz_ / divisor.mhz_;
  wide_int r = mhz_ % divisor.mhz_;
  if (r != 0 && ((r < 0) != (divisor.mhz_ < 0))) {
    q -= 1;
    r += divisor.mhz_;
  }
  return {q, ExactFrequency(r)};
}

}  // namespace combfit
