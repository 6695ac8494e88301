#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace owlaudit {

class DecimalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact base-10 number: unscaled * 10^-scale, kept normalized so that equal
// values have equal representations (no trailing zeros in the fraction).
class Decimal {
 public:
  using Int = boost::multiprecision::cpp_int;

  // Upper bounds for the lexical decoder. Anything beyond is an overflow.
  static constexpr std::size_t kMaxDigits = 512;
  static constexpr std::int64_t kMaxExponent = 1024;

  Decimal() = default;
  Decimal(std::int64_t value);  // NOLINT(google-explicit-constructor)
  Decimal(Int unscaled, std::uint32_t scale);

  // Accepts the xsd:integer / xsd:decimal / xsd:double lexical spaces
  // (finite values only). Throws DecimalError on malformed or oversize input.
  static Decimal parse(std::string_view lexical);

  [[nodiscard]] bool is_integer() const { return scale_ == 0; }
  [[nodiscard]] bool is_zero() const { return unscaled_ == 0; }
  [[nodiscard]] int sign() const { return unscaled_.sign(); }
  [[nodiscard]] Decimal floor() const;
  [[nodiscard]] Decimal ceil() const;
  [[nodiscard]] Decimal half() const;

  // Shortest exact representation, e.g. "1000", "-0.25".
  [[nodiscard]] std::string to_string() const;

  friend Decimal operator+(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a, const Decimal& b);
  friend Decimal operator-(const Decimal& a);

  friend bool operator==(const Decimal& a, const Decimal& b) {
    return a.scale_ == b.scale_ && a.unscaled_ == b.unscaled_;
  }
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

 private:
  void normalize();

  Int unscaled_ = 0;
  std::uint32_t scale_ = 0;
};

}  // namespace owlaudit
