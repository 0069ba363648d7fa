#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qmem/bigint.hpp"

namespace qmem {

/// Multiset of positive integer part sizes, stored as size -> multiplicity
/// with the largest size first. A part of size s stands for one full s x s
/// matrix block of a finite-dimensional algebra; a classical algebra has all
/// parts equal to 1. Sizes and multiplicities are exact big integers so that
/// tensor powers never overflow or round.
class Shape {
 public:
  using Map = std::map<BigInt, BigInt, std::greater<BigInt>>;

  Shape() = default;

  /// Build from an explicit part list, e.g. {2,1,1}.
  static Shape of(const std::vector<BigInt>& parts);

  /// Build from a size -> multiplicity map.
  static Shape from_counts(const Map& counts);

  /// Parse a comma-separated part list ("4,2,2,1"). A part may carry an
  /// explicit multiplicity as "size:mult" ("2:3,1:2").
  static Shape parse(const std::string& text);

  const Map& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t distinct_count() const { return parts_.size(); }

  BigInt total() const;       // sum of all parts (the 1-norm)
  BigInt part_count() const;  // number of parts (sum of multiplicities)
  const BigInt& max_part() const;
  const BigInt& max_part_multiplicity() const;
  BigInt min_part() const;
  BigInt multiplicity_of(const BigInt& size) const;

  /// Sum of all parts with size >= x.
  BigInt tail_ge(const BigInt& x) const;
  BigInt tail_ge(double x) const;

  /// Sum of all parts whose log-size is >= log_x. The comparison stays in
  /// log space so a threshold like e^{n t} never rounds through a double.
  BigInt tail_ge_log(double log_x) const;

  /// Number of parts with size >= x.
  BigInt count_ge(const BigInt& x) const;

  /// Explicit descending part list; errors if more than max_parts parts.
  std::vector<BigInt> expanded(std::size_t max_parts = (1u << 20)) const;

  bool operator==(const Shape&) const = default;

  std::string str() const;

 private:
  Map parts_;
};

/// Parts of the tensor product: all pairwise size products with multiplicity
/// products. Satisfies |lambda(a (x) b)|_p = |lambda(a)|_p * |lambda(b)|_p.
Shape tensor(const Shape& a, const Shape& b);

/// n-fold tensor power, n >= 1.
Shape tensor_power(const Shape& s, unsigned n);

/// Same sizes with every multiplicity scaled by l >= 1.
Shape repeat(const Shape& s, const BigInt& l);

/// log |lambda|_p in nats for p in [1, inf]; p = inf gives log(max part).
/// Evaluated by shifted log-sum-exp so huge parts stay finite.
double log_p_norm(const Shape& s, double p);

/// True iff every tail of `big` dominates the matching tail of `small`:
/// small_{>=x} <= big_{>=x} for all real x >= 1. Checked exactly at the
/// breakpoints (the union of distinct sizes).
bool supermajorizes(const Shape& big, const Shape& small);

}  // namespace qmem
