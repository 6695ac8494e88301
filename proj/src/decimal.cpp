#include "owlaudit/decimal.hpp"

#include <cctype>

namespace owlaudit {

namespace {

Decimal::Int pow10(std::uint32_t n) {
  Decimal::Int r = 1;
  for (std::uint32_t i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Decimal::Decimal(std::int64_t value) : unscaled_(value), scale_(0) {}

Decimal::Decimal(Int unscaled, std::uint32_t scale)
    : unscaled_(std::move(unscaled)), scale_(scale) {
  normalize();
}

void Decimal::normalize() {
  if (unscaled_ == 0) {
    scale_ = 0;
    return;
  }
  while (scale_ > 0 && unscaled_ % 10 == 0) {
    unscaled_ /= 10;
    --scale_;
  }
}

Decimal Decimal::parse(std::string_view lexical) {
  std::size_t i = 0;
  const std::size_t n = lexical.size();
  bool negative = false;
  if (i < n && (lexical[i] == '+' || lexical[i] == '-')) {
    negative = lexical[i] == '-';
    ++i;
  }
  Int digits = 0;
  std::size_t digit_count = 0;
  std::int64_t frac_digits = 0;
  bool seen_digit = false;
  auto take_digit = [&](char ch) {
    if (digit_count > 0 || ch != '0') ++digit_count;
    if (digit_count > kMaxDigits) {
      throw DecimalError("numeric literal overflow: more than " +
                         std::to_string(kMaxDigits) + " significant digits in '" +
                         std::string(lexical) + "'");
    }
    digits = digits * 10 + (ch - '0');
    seen_digit = true;
  };
  while (i < n && std::isdigit(static_cast<unsigned char>(lexical[i]))) take_digit(lexical[i++]);
  if (i < n && lexical[i] == '.') {
    ++i;
    while (i < n && std::isdigit(static_cast<unsigned char>(lexical[i]))) {
      take_digit(lexical[i++]);
      ++frac_digits;
    }
  }
  if (!seen_digit) throw DecimalError("malformed numeric literal '" + std::string(lexical) + "'");
  std::int64_t exponent = 0;
  if (i < n && (lexical[i] == 'e' || lexical[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < n && (lexical[i] == '+' || lexical[i] == '-')) {
      exp_negative = lexical[i] == '-';
      ++i;
    }
    if (i >= n) throw DecimalError("malformed exponent in '" + std::string(lexical) + "'");
    while (i < n && std::isdigit(static_cast<unsigned char>(lexical[i]))) {
      exponent = exponent * 10 + (lexical[i++] - '0');
      if (exponent > kMaxExponent) {
        throw DecimalError("numeric literal overflow: exponent out of range in '" +
                           std::string(lexical) + "'");
      }
    }
    if (exp_negative) exponent = -exponent;
  }
  if (i != n) throw DecimalError("malformed numeric literal '" + std::string(lexical) + "'");

  std::int64_t scale = frac_digits - exponent;
  if (scale < 0) {
    digits *= pow10(static_cast<std::uint32_t>(-scale));
    scale = 0;
  }
  if (negative) digits = -digits;
  return Decimal(std::move(digits), static_cast<std::uint32_t>(scale));
}

Decimal Decimal::floor() const {
  if (scale_ == 0) return *this;
  Int p = pow10(scale_);
  Int q = unscaled_ / p;  // truncates toward zero
  if (unscaled_ < 0) q -= 1;
  return Decimal(std::move(q), 0);
}

Decimal Decimal::ceil() const {
  if (scale_ == 0) return *this;
  Int p = pow10(scale_);
  Int q = unscaled_ / p;
  if (unscaled_ > 0) q += 1;
  return Decimal(std::move(q), 0);
}

Decimal Decimal::half() const { return Decimal(unscaled_ * 5, scale_ + 1); }

std::string Decimal::to_string() const {
  Int mag = unscaled_ < 0 ? Int(-unscaled_) : unscaled_;
  std::string s = mag.str();
  if (scale_ > 0) {
    if (s.size() <= scale_) s.insert(0, scale_ - s.size() + 1, '0');
    s.insert(s.size() - scale_, 1, '.');
  }
  if (unscaled_ < 0) s.insert(0, 1, '-');
  return s;
}

namespace {

// Brings both operands to the same scale.
std::pair<Decimal::Int, Decimal::Int> aligned(const Decimal::Int& a, std::uint32_t sa,
                                              const Decimal::Int& b, std::uint32_t sb) {
  if (sa == sb) return {a, b};
  if (sa < sb) return {a * pow10(sb - sa), b};
  return {a, b * pow10(sa - sb)};
}

}  // namespace

Decimal operator+(const Decimal& a, const Decimal& b) {
  auto [x, y] = aligned(a.unscaled_, a.scale_, b.unscaled_, b.scale_);
  return Decimal(x + y, std::max(a.scale_, b.scale_));
}

Decimal operator-(const Decimal& a, const Decimal& b) {
  auto [x, y] = aligned(a.unscaled_, a.scale_, b.unscaled_, b.scale_);
  return Decimal(x - y, std::max(a.scale_, b.scale_));
}

Decimal operator-(const Decimal& a) { return Decimal(-a.unscaled_, a.scale_); }

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  auto [x, y] = aligned(a.unscaled_, a.scale_, b.unscaled_, b.scale_);
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace owlaudit
