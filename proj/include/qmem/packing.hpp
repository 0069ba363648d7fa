#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qmem/shapes.hpp"

namespace qmem {

/// A group of identically-filled bins inside a packing certificate.
/// `placed[i]` counts how many copies of `BratteliDiagram::block_sizes[i]`
/// sit in EACH bin of the group.
struct BinGroup {
  BigInt bin_size;
  BigInt count;
  std::vector<BigInt> placed;
};

/// Certificate that algebra shape `a` embeds into `b`, recorded as a bin
/// packing: every a-part is assigned to some b-part without exceeding its
/// size. Bins with equal capacity and equal contents are aggregated with a
/// big-integer count, so certificates for tensor-power shapes stay small.
struct BratteliDiagram {
  std::vector<BigInt> block_sizes;  // distinct a-part sizes, descending
  std::vector<BinGroup> groups;
};

/// Checks that `d` proves a embeds into b: every group's contents fit in its
/// bin size, no more bins of a size are used than b provides, and each
/// a-part size is placed at least as often as its multiplicity.
bool verify_diagram(const Shape& a, const Shape& b, const BratteliDiagram& d);

/// Build a certificate from a dense assignment matrix with one row per
/// expanded a-part (descending) and one column per expanded b-part
/// (descending); entry = copies of the row's part placed in that column's
/// part. Intended for small, explicit examples.
BratteliDiagram diagram_from_dense(const Shape& a, const Shape& b,
                                   const std::vector<std::vector<BigInt>>& m);

enum class EmbedStatus { Embeddable, NotEmbeddable, Unknown };

struct EmbedResult {
  EmbedStatus status = EmbedStatus::Unknown;
  std::optional<BratteliDiagram> diagram;  // present iff Embeddable
  std::uint64_t nodes_explored = 0;
};

/// Exact embedding decision by branch-and-bound bin packing. Parts are
/// placed largest first; bins with equal remaining capacity are explored
/// once; a branch is cut when the remaining parts are no longer
/// supermajorized by the remaining capacities. Returns Unknown when the
/// node budget is exhausted.
EmbedResult decide_embed(const Shape& a, const Shape& b,
                         std::uint64_t node_budget = 10'000'000);

/// Largest-first best-fit packing (each part goes to the tightest bin it
/// fits). Runs on aggregated bin groups, so multiplicities may be huge.
/// Guaranteed to succeed when 2*lambda(a) is supermajorized by lambda(b);
/// may also succeed without that condition. Returns nothing on failure.
std::optional<BratteliDiagram> greedy_embed(const Shape& a, const Shape& b);

}  // namespace qmem
