#include "combfit/rational.hpp"

#include <cctype>
#include <string>
#include <vector>

#include "combfit/errors.hpp"

namespace combfit {

namespace {

wide_int abs_wide(wide_int v) { return v < 0 ? -v : v; }

wide_int gcd_wide(wide_int a, wide_int b) {
  a = abs_wide(a);
  b = abs_wide(b);
  while (b != 0) {
    const wide_int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational::Rational(wide_int numerator, wide_int denominator) {
  if (denominator == 0) {
    throw domain_error("rational with zero denominator");
  }
  if (denominator < 0) {
    numerator = checked_mul(numerator, -1);
    denominator = checked_mul(denominator, -1);
  }
  const wide_int g = gcd_wide(numerator, denominator);
  num_ = numerator / g;
  den_ = denominator / g;
}

Rational Rational::parse_decimal(std::string_view text) {
  const std::string original(text);
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  wide_int mantissa = 0;
  int digits = 0;
  int fraction_digits = 0;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      mantissa = checked_add(checked_mul(mantissa, 10), ch - '0');
      ++digits;
      fraction_digits += seen_point ? 1 : 0;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  int exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    const std::size_t exp_start = pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      exponent = exponent * 10 + (text[pos] - '0');
      if (exponent > 76) {
        throw input_error("decimal exponent out of range: " + original);
      }
    }
    if (pos == exp_start || (exp_negative && pos == exp_start + 1)) {
      throw input_error("empty decimal exponent: " + original);
    }
    exponent = exp_negative ? -exponent : exponent;
  }
  if (digits == 0 || pos != text.size()) {
    throw input_error("invalid decimal: " + original);
  }
  const int scale = exponent - fraction_digits;
  wide_int num = negative ? -mantissa : mantissa;
  wide_int den = 1;
  for (int i = 0; i < (scale > 0 ? scale : -scale); ++i) {
    if (scale > 0) {
      num = checked_mul(num, 10);
    } else {
      den = checked_mul(den, 10);
    }
  }
  return Rational(num, den);
}

Rational Rational::inverse() const {
  if (num_ == 0) {
    throw domain_error("inverse of zero rational");
  }
  return Rational(den_, num_);
}

Rational Rational::operator-() const { return Rational(checked_mul(num_, -1), den_); }

Rational Rational::operator*(const Rational& rhs) const {
  // Cross-reduce first so that a/b * b/a never forms a large intermediate.
  const wide_int g1 = gcd_wide(num_, rhs.den_);
  const wide_int g2 = gcd_wide(rhs.num_, den_);
  const wide_int n1 = g1 == 0 ? num_ : num_ / g1;
  const wide_int d2 = g1 == 0 ? rhs.den_ : rhs.den_ / g1;
  const wide_int n2 = g2 == 0 ? rhs.num_ : rhs.num_ / g2;
  const wide_int d1 = g2 == 0 ? den_ : den_ / g2;
  return Rational(checked_mul(n1, n2), checked_mul(d1, d2));
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const wide_int lhs = checked_mul(a.num_, b.den_);
  const wide_int rhs = checked_mul(b.num_, a.den_);
  return lhs <=> rhs;
}

long double Rational::to_long_double() const {
  return static_cast<long double>(num_) / static_cast<long double>(den_);
}

std::string Rational::to_string() const {
  return to_decimal_string(num_) + "/" + to_decimal_string(den_);
}

std::string Rational::to_decimal(int significant_digits) const {
  if (significant_digits < 1 || significant_digits > 60) {
    throw domain_error("significant digits must be in 1..60");
  }
  if (num_ == 0) {
    return "0";
  }
  if (den_ > wide_int(1) << 122) {
    throw overflow_error("denominator too large for decimal rendering");
  }
  const wide_int magnitude = abs_wide(num_);
  const std::string integer_part = magnitude / den_ == 0 ? "" : to_decimal_string(magnitude / den_);
  wide_int remainder = magnitude % den_;

  // Collect significant digits + 1 guard digit from the exact digit stream.
  std::vector<int> digits;
  int exponent = 0;  // decimal exponent of digits[0]
  const auto wanted = static_cast<std::size_t>(significant_digits + 1);
  const int int_len = static_cast<int>(integer_part.size());
  for (int i = 0; i < int_len && digits.size() < wanted; ++i) {
    if (digits.empty()) {
      exponent = int_len - 1 - i;
    }
    digits.push_back(integer_part[static_cast<std::size_t>(i)] - '0');
  }
  int position = 0;
  while (digits.size() < wanted) {
    --position;
    remainder *= 10;
    const int d = static_cast<int>(remainder / den_);
    remainder %= den_;
    if (digits.empty() && d == 0) {
      continue;
    }
    if (digits.empty()) {
      exponent = position;
    }
    digits.push_back(d);
  }

  const bool round_up = digits.back() >= 5;
  digits.pop_back();
  if (round_up) {
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && digits[static_cast<std::size_t>(i)] == 9) {
      digits[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) {
      digits.insert(digits.begin(), 1);
      digits.pop_back();
      ++exponent;
    } else {
      ++digits[static_cast<std::size_t>(i)];
    }
  }

  std::string out = num_ < 0 ? "-" : "";
  auto digit_char = [&](std::size_t i) { return static_cast<char>('0' + digits[i]); };
  if (exponent >= -5 && exponent < significant_digits) {
    if (exponent >= 0) {
      for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i == static_cast<std::size_t>(exponent) + 1) {
          out += '.';
        }
        out += digit_char(i);
      }
    } else {
      out += "0.";
      out.append(static_cast<std::size_t>(-exponent - 1), '0');
      for (std::size_t i = 0; i < digits.size(); ++i) {
        out += digit_char(i);
      }
    }
  } else {
    out += digit_char(0);
    if (digits.size() > 1) {
      out += '.';
      for (std::size_t i = 1; i < digits.size(); ++i) {
        out += digit_char(i);
      }
    }
    out += exponent < 0 ? "e-" : "e+";
    const int e = exponent < 0 ? -exponent : exponent;
    if (e < 10) {
      out += '0';
    }
    out += std::to_string(e);
  }
  return out;
}

}  // namespace combfit
