#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace qmem {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Natural log of a positive big integer, accurate to ~1 ulp even when the
/// value is far outside double range.
inline double log_big(const BigInt& x) {
  if (x <= 0) throw std::domain_error("log_big: argument must be positive");
  unsigned n = static_cast<unsigned>(boost::multiprecision::msb(x));
  if (n < 63) return std::log(x.convert_to<double>());
  // Keep the top 63 bits; the discarded tail perturbs the log by < 2^-62.
  BigInt top = x >> (n - 62);
  return std::log(top.convert_to<double>()) +
         static_cast<double>(n - 62) * std::log(2.0);
}

/// Exact ceiling of a finite double as a big integer.
inline BigInt ceil_big(double x) {
  if (!std::isfinite(x)) throw std::domain_error("ceil_big: non-finite argument");
  return BigInt(std::ceil(x));
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

/// n! / (c_0! c_1! ... c_m!) for a composition of n.
inline BigInt multinomial(unsigned n, const std::vector<unsigned>& counts) {
  BigInt r = 1;
  unsigned rest = n;
  for (unsigned c : counts) {
    if (c > rest) throw std::invalid_argument("multinomial: counts exceed n");
    r *= binomial(rest, c);
    rest -= c;
  }
  if (rest != 0) throw std::invalid_argument("multinomial: counts do not sum to n");
  return r;
}

}  // namespace qmem
