#pragma once

// Independent reference computations for the statistics tests.

#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace owlaudit::testing {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// Row n of Pascal's triangle by repeated addition.
inline std::vector<cpp_int> pascal_row(std::uint64_t n) {
  std::vector<cpp_int> row{1};
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<cpp_int> next(row.size() + 1, 0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      next[j] += row[j];
      next[j + 1] += row[j];
    }
    row = std::move(next);
  }
  return row;
}

// min(1, 2 * sum_{i <= min(b,c)} C(n, i) / 2^n) by brute-force summation.
inline cpp_rational mcnemar_oracle(std::uint64_t b, std::uint64_t c) {
  std::uint64_t n = b + c;
  if (n == 0) return 1;
  auto row = pascal_row(n);
  cpp_int tail = 0;
  for (std::uint64_t i = 0; i <= std::min(b, c); ++i) tail += row[i];
  cpp_rational p(2 * tail, cpp_int(1) << n);
  return p > 1 ? cpp_rational(1) : p;
}

// Textbook Wilson interval in long double with the 97.5 % normal quantile.
inline std::pair<double, double> wilson_oracle(std::uint64_t k, std::uint64_t n) {
  const long double z = 1.959963984540054L;
  long double p = static_cast<long double>(k) / n;
  long double denom = 1 + z * z / n;
  long double centre = (p + z * z / (2 * n)) / denom;
  long double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0L * n * n)) / denom;
  return {static_cast<double>(centre - half), static_cast<double>(centre + half)};
}

// Rounds x to `digits` significant figures.
inline double round_sig(double x, int digits) {
  if (x == 0) return 0;
  double scale = std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(x)))));
  return std::round(x * scale) / scale;
}

}  // namespace owlaudit::testing
