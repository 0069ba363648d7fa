#include "qmem/packing.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace qmem {
namespace {

std::vector<BigInt> distinct_sizes_desc(const Shape& s) {
  std::vector<BigInt> v;
  v.reserve(s.distinct_count());
  for (const auto& [size, mult] : s.parts()) v.push_back(size);
  return v;
}

}  // namespace

bool verify_diagram(const Shape& a, const Shape& b, const BratteliDiagram& d) {
  if (a.empty() || b.empty()) return false;
  const auto want = distinct_sizes_desc(a);
  if (d.block_sizes != want) return false;
  const std::size_t na = want.size();

  std::map<BigInt, BigInt> bins_used;
  std::vector<BigInt> placed_total(na, 0);
  for (const BinGroup& g : d.groups) {
    if (g.count < 1) return false;
    if (g.placed.size() != na) return false;
    if (b.multiplicity_of(g.bin_size) == 0) return false;
    BigInt load = 0;
    for (std::size_t i = 0; i < na; ++i) {
      if (g.placed[i] < 0) return false;
      load += g.placed[i] * want[i];
      placed_total[i] += g.placed[i] * g.count;
    }
    if (load > g.bin_size) return false;
    bins_used[g.bin_size] += g.count;
  }
  for (const auto& [size, used] : bins_used)
    if (used > b.multiplicity_of(size)) return false;
  for (std::size_t i = 0; i < na; ++i)
    if (placed_total[i] < a.multiplicity_of(want[i])) return false;
  return true;
}

BratteliDiagram diagram_from_dense(const Shape& a, const Shape& b,
                                   const std::vector<std::vector<BigInt>>& m) {
  const auto aexp = a.expanded();
  const auto bexp = b.expanded();
  if (m.size() != aexp.size())
    throw std::invalid_argument("diagram_from_dense: row count != part count of a");
  for (const auto& row : m)
    if (row.size() != bexp.size())
      throw std::invalid_argument("diagram_from_dense: column count != part count of b");

  const auto asizes = distinct_sizes_desc(a);
  auto size_index = [&](const BigInt& s) {
    return static_cast<std::size_t>(
        std::find(asizes.begin(), asizes.end(), s) - asizes.begin());
  };

  // One candidate group per column, then aggregate equal (bin, contents).
  std::map<std::pair<BigInt, std::vector<BigInt>>, BigInt> agg;
  for (std::size_t j = 0; j < bexp.size(); ++j) {
    std::vector<BigInt> placed(asizes.size(), 0);
    bool any = false;
    for (std::size_t r = 0; r < aexp.size(); ++r) {
      if (m[r][j] < 0)
        throw std::invalid_argument("diagram_from_dense: negative entry");
      if (m[r][j] == 0) continue;
      placed[size_index(aexp[r])] += m[r][j];
      any = true;
    }
    if (any) agg[{bexp[j], placed}] += 1;
  }

  BratteliDiagram d;
  d.block_sizes = asizes;
  for (const auto& [key, count] : agg)
    d.groups.push_back(BinGroup{key.first, count, key.second});
  return d;
}

namespace {

// Branch-and-bound search state. Parts are consumed largest first; bins
// sharing a remaining capacity are interchangeable, so only the first bin
// of each remaining value is branched on.
struct EmbedSearch {
  std::vector<BigInt> asizes;
  std::vector<std::int64_t> acounts;
  struct Bin {
    BigInt orig;
    BigInt remaining;
    std::vector<std::int64_t> contents;
  };
  std::vector<Bin> bins;
  std::map<BigInt, std::int64_t, std::greater<BigInt>> part_rem;
  std::map<BigInt, std::int64_t, std::greater<BigInt>> cap_rem;
  std::uint64_t nodes = 0;
  std::uint64_t budget = 0;
  bool exhausted = false;

  // Every tail of the remaining parts must stay below the matching tail of
  // the remaining capacities; otherwise no completion exists.
  bool caps_dominate() const {
    auto ip = part_rem.begin();
    auto ic = cap_rem.begin();
    BigInt ptail = 0, ctail = 0;
    while (ip != part_rem.end() || ic != cap_rem.end()) {
      BigInt x;
      if (ic == cap_rem.end()) x = ip->first;
      else if (ip == part_rem.end()) x = ic->first;
      else x = std::max(ip->first, ic->first);
      while (ic != cap_rem.end() && ic->first >= x) {
        ctail += ic->first * ic->second;
        ++ic;
      }
      while (ip != part_rem.end() && ip->first >= x) {
        ptail += ip->first * ip->second;
        ++ip;
      }
      if (ptail > ctail) return false;
    }
    return true;
  }

  void cap_shift(const BigInt& from, const BigInt& to) {
    auto it = cap_rem.find(from);
    if (--(it->second) == 0) cap_rem.erase(it);
    if (to > 0) cap_rem[to] += 1;
  }

  bool dfs(std::size_t idx) {
    while (idx < asizes.size() && acounts[idx] == 0) ++idx;
    if (idx == asizes.size()) return true;
    if (++nodes > budget) {
      exhausted = true;
      return false;
    }
    if (!caps_dominate()) return false;

    const BigInt& s = asizes[idx];
    // Distinct remaining capacities that fit s, tightest first.
    std::vector<BigInt> candidates;
    for (auto it = cap_rem.rbegin(); it != cap_rem.rend(); ++it)
      if (it->first >= s) candidates.push_back(it->first);

    for (const BigInt& r : candidates) {
      std::size_t bi = 0;
      while (bi < bins.size() && bins[bi].remaining != r) ++bi;
      Bin& bin = bins[bi];

      bin.remaining -= s;
      bin.contents[idx] += 1;
      acounts[idx] -= 1;
      cap_shift(r, bin.remaining);
      auto pit = part_rem.find(s);
      if (--(pit->second) == 0) part_rem.erase(pit);

      if (dfs(idx)) return true;

      part_rem[s] += 1;
      cap_shift(bin.remaining, r);
      acounts[idx] += 1;
      bin.contents[idx] -= 1;
      bin.remaining += s;

      if (exhausted) return false;
    }
    return false;
  }
};

}  // namespace

EmbedResult decide_embed(const Shape& a, const Shape& b,
                         std::uint64_t node_budget) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("decide_embed: empty shape");
  EmbedResult res;
  // The explicit search needs machine-sized part counts.
  if (a.part_count() > 4096 || b.part_count() > 4096) {
    res.status = EmbedStatus::Unknown;
    return res;
  }

  EmbedSearch search;
  search.budget = node_budget;
  search.asizes = distinct_sizes_desc(a);
  for (const BigInt& s : search.asizes) {
    auto c = a.multiplicity_of(s).convert_to<std::int64_t>();
    search.acounts.push_back(c);
    search.part_rem[s] = c;
  }
  for (const auto& [size, mult] : b.parts()) {
    auto c = mult.convert_to<std::int64_t>();
    for (std::int64_t i = 0; i < c; ++i)
      search.bins.push_back(EmbedSearch::Bin{
          size, size, std::vector<std::int64_t>(search.asizes.size(), 0)});
    search.cap_rem[size] = c;
  }

  bool found = search.dfs(0);
  res.nodes_explored = search.nodes;
  if (found) {
    std::map<std::pair<BigInt, std::vector<std::int64_t>>, BigInt> agg;
    for (const auto& bin : search.bins) {
      bool any = false;
      for (auto c : bin.contents) any = any || c > 0;
      if (any) agg[{bin.orig, bin.contents}] += 1;
    }
    BratteliDiagram d;
    d.block_sizes = search.asizes;
    for (const auto& [key, count] : agg) {
      std::vector<BigInt> placed(key.second.begin(), key.second.end());
      d.groups.push_back(BinGroup{key.first, count, placed});
    }
    res.status = EmbedStatus::Embeddable;
    res.diagram = std::move(d);
  } else if (search.exhausted) {
    res.status = EmbedStatus::Unknown;
  } else {
    res.status = EmbedStatus::NotEmbeddable;
  }
  return res;
}

namespace {

struct GreedyGroup {
  BigInt orig;
  BigInt remaining;
  BigInt count;
  std::vector<BigInt> placed;
};

}  // namespace

std::optional<BratteliDiagram> greedy_embed(const Shape& a, const Shape& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("greedy_embed: empty shape");
  const auto asizes = distinct_sizes_desc(a);
  std::vector<GreedyGroup> groups;
  for (const auto& [size, mult] : b.parts())
    groups.push_back(
        GreedyGroup{size, size, mult, std::vector<BigInt>(asizes.size(), 0)});

  for (std::size_t idx = 0; idx < asizes.size(); ++idx) {
    const BigInt& s = asizes[idx];
    BigInt m = a.multiplicity_of(s);
    while (m > 0) {
      // Best fit: tightest remaining capacity that still holds s.
      std::size_t best = groups.size();
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].remaining < s) continue;
        if (best == groups.size() ||
            groups[g].remaining < groups[best].remaining ||
            (groups[g].remaining == groups[best].remaining &&
             groups[g].orig < groups[best].orig))
          best = g;
      }
      if (best == groups.size()) return std::nullopt;

      GreedyGroup& g = groups[best];
      BigInt k = g.remaining / s;  // copies each bin of this group absorbs
      BigInt full_bins = std::min(g.count, BigInt(m / k));
      if (full_bins > 0) {
        GreedyGroup filled = g;
        filled.remaining -= k * s;
        filled.count = full_bins;
        filled.placed[idx] += k;
        m -= full_bins * k;
        g.count -= full_bins;
        groups.push_back(std::move(filled));
      }
      if (m > 0 && groups[best].count > 0) {
        GreedyGroup& gg = groups[best];  // push_back may have moved storage
        GreedyGroup partial = gg;
        partial.remaining -= m * s;
        partial.count = 1;
        partial.placed[idx] += m;
        m = 0;
        gg.count -= 1;
        groups.push_back(std::move(partial));
      }
      if (groups[best].count == 0) groups.erase(groups.begin() + best);
    }
  }

  BratteliDiagram d;
  d.block_sizes = asizes;
  std::map<std::pair<BigInt, std::vector<BigInt>>, BigInt> agg;
  for (const auto& g : groups) {
    bool any = false;
    for (const auto& c : g.placed) any = any || c > 0;
    if (any) agg[{g.orig, g.placed}] += g.count;
  }
  for (const auto& [key, count] : agg)
    d.groups.push_back(BinGroup{key.first, count, key.second});
  return d;
}

}  // namespace qmem
