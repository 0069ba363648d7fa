#include "qmem/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qmem {

Shape Shape::of(const std::vector<BigInt>& parts) {
  if (parts.empty()) throw std::invalid_argument("shape: empty part list");
  Map m;
  for (const BigInt& p : parts) {
    if (p <= 0) throw std::invalid_argument("shape: parts must be positive");
    m[p] += 1;
  }
  Shape s;
  s.parts_ = std::move(m);
  return s;
}

Shape Shape::from_counts(const Map& counts) {
  if (counts.empty()) throw std::invalid_argument("shape: empty part map");
  for (const auto& [size, mult] : counts) {
    if (size <= 0) throw std::invalid_argument("shape: parts must be positive");
    if (mult <= 0) throw std::invalid_argument("shape: multiplicities must be positive");
  }
  Shape s;
  s.parts_ = counts;
  return s;
}

Shape Shape::parse(const std::string& text) {
  Map m;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw std::invalid_argument("shape: empty entry in '" + text + "'");
    BigInt size, mult = 1;
    auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        size = BigInt(item);
      } else {
        size = BigInt(item.substr(0, colon));
        mult = BigInt(item.substr(colon + 1));
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("shape: bad entry '" + item + "'");
    }
    if (size <= 0 || mult <= 0)
      throw std::invalid_argument("shape: entries must be positive in '" + text + "'");
    m[size] += mult;
  }
  if (m.empty()) throw std::invalid_argument("shape: no parts in '" + text + "'");
  return from_counts(m);
}

BigInt Shape::total() const {
  BigInt t = 0;
  for (const auto& [size, mult] : parts_) t += size * mult;
  return t;
}

BigInt Shape::part_count() const {
  BigInt c = 0;
  for (const auto& [size, mult] : parts_) c += mult;
  return c;
}

const BigInt& Shape::max_part() const {
  if (parts_.empty()) throw std::logic_error("shape: empty");
  return parts_.begin()->first;
}

const BigInt& Shape::max_part_multiplicity() const {
  if (parts_.empty()) throw std::logic_error("shape: empty");
  return parts_.begin()->second;
}

BigInt Shape::min_part() const {
  if (parts_.empty()) throw std::logic_error("shape: empty");
  return parts_.rbegin()->first;
}

BigInt Shape::multiplicity_of(const BigInt& size) const {
  auto it = parts_.find(size);
  return it == parts_.end() ? BigInt(0) : it->second;
}

BigInt Shape::tail_ge(const BigInt& x) const {
  BigInt t = 0;
  for (const auto& [size, mult] : parts_) {
    if (size < x) break;
    t += size * mult;
  }
  return t;
}

BigInt Shape::tail_ge(double x) const {
  if (!std::isfinite(x)) {
    if (x < 0) return total();
    return 0;
  }
  if (x <= 1.0) return total();
  return tail_ge(ceil_big(x));
}

BigInt Shape::tail_ge_log(double log_x) const {
  BigInt t = 0;
  for (const auto& [size, mult] : parts_) {
    if (log_big(size) < log_x) break;
    t += size * mult;
  }
  return t;
}

BigInt Shape::count_ge(const BigInt& x) const {
  BigInt c = 0;
  for (const auto& [size, mult] : parts_) {
    if (size < x) break;
    c += mult;
  }
  return c;
}

std::vector<BigInt> Shape::expanded(std::size_t max_parts) const {
  if (part_count() > max_parts)
    throw std::length_error("shape: too many parts to expand");
  std::vector<BigInt> out;
  out.reserve(part_count().convert_to<std::size_t>());
  for (const auto& [size, mult] : parts_) {
    std::size_t m = mult.convert_to<std::size_t>();
    for (std::size_t i = 0; i < m; ++i) out.push_back(size);
  }
  return out;
}

std::string Shape::str() const {
  std::ostringstream os;
  if (part_count() <= 64) {
    bool first = true;
    for (const auto& [size, mult] : parts_) {
      for (BigInt i = 0; i < mult; ++i) {
        if (!first) os << ",";
        os << size;
        first = false;
      }
    }
  } else {
    bool first = true;
    for (const auto& [size, mult] : parts_) {
      if (!first) os << ",";
      os << size << ":" << mult;
      first = false;
    }
  }
  return os.str();
}

Shape tensor(const Shape& a, const Shape& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("tensor: empty shape");
  Shape::Map m;
  for (const auto& [sa, ma] : a.parts())
    for (const auto& [sb, mb] : b.parts()) m[sa * sb] += ma * mb;
  return Shape::from_counts(m);
}

Shape tensor_power(const Shape& s, unsigned n) {
  if (n < 1) throw std::invalid_argument("tensor_power: n must be >= 1");
  if (s.empty()) throw std::invalid_argument("tensor_power: empty shape");
  Shape acc = Shape::of({1});
  Shape base = s;
  unsigned k = n;
  while (k > 0) {
    if (k & 1u) acc = tensor(acc, base);
    k >>= 1u;
    if (k > 0) base = tensor(base, base);
  }
  return acc;
}

Shape repeat(const Shape& s, const BigInt& l) {
  if (l < 1) throw std::invalid_argument("repeat: factor must be >= 1");
  if (s.empty()) throw std::invalid_argument("repeat: empty shape");
  Shape::Map m = s.parts();
  for (auto& [size, mult] : m) mult *= l;
  return Shape::from_counts(m);
}

double log_p_norm(const Shape& s, double p) {
  if (s.empty()) throw std::invalid_argument("log_p_norm: empty shape");
  if (std::isnan(p) || p < 1.0)
    throw std::invalid_argument("log_p_norm: p must be in [1, inf]");
  if (std::isinf(p)) return log_big(s.max_part());
  if (p == 1.0) return log_big(s.total());
  // log sum over parts of size^p, shifted by the largest exponent.
  double shift = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(s.distinct_count());
  for (const auto& [size, mult] : s.parts()) {
    double t = log_big(mult) + p * log_big(size);
    terms.push_back(t);
    shift = std::max(shift, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - shift);
  return (shift + std::log(acc)) / p;
}

bool supermajorizes(const Shape& big, const Shape& small) {
  if (big.empty() || small.empty())
    throw std::invalid_argument("supermajorizes: empty shape");
  // Single descending sweep over the union of breakpoints, accumulating
  // both tails as sizes are absorbed.
  auto ib = big.parts().begin();
  auto is = small.parts().begin();
  BigInt btail = 0, stail = 0;
  while (ib != big.parts().end() || is != small.parts().end()) {
    BigInt x;
    if (ib == big.parts().end()) x = is->first;
    else if (is == small.parts().end()) x = ib->first;
    else x = std::max(ib->first, is->first);
    while (ib != big.parts().end() && ib->first >= x) {
      btail += ib->first * ib->second;
      ++ib;
    }
    while (is != small.parts().end() && is->first >= x) {
      stail += is->first * is->second;
      ++is;
    }
    if (stail > btail) return false;
  }
  return true;
}

}  // namespace qmem
