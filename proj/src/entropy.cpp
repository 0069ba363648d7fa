#include "qmem/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "qmem/errors.hpp"
#include "qmem/largedev.hpp"

namespace qmem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Block sizes, largest first, one entry per block.  Guarded so that a state
// over the shape stays materializable eigenvalue by eigenvalue.
std::vector<std::size_t> materialized_sizes(const Shape& s) {
  if (s.empty()) throw std::invalid_argument("materialized state: empty shape");
  if (s.part_count() > 1'000'000 || s.total() > 4'000'000)
    throw BudgetExceeded("materialized state: shape dimension is out of reach");
  std::vector<std::size_t> sizes;
  sizes.reserve(s.part_count().convert_to<std::size_t>());
  for (const auto& [size, mult] : s.parts()) {
    const std::size_t sz = size.convert_to<std::size_t>();
    for (BigInt i = 0; i < mult; ++i) sizes.push_back(sz);
  }
  return sizes;
}

// Root of f by bisection; falls back to the endpoint with the smaller
// residual when the endpoints do not straddle zero.
template <class F>
double bisect(F&& f, double lo, double hi) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) return std::abs(flo) <= std::abs(fhi) ? lo : hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Shape DiagonalState::shape() const {
  std::vector<BigInt> parts;
  parts.reserve(blocks.size());
  for (const auto& b : blocks) parts.emplace_back(b.size());
  return Shape::of(parts);
}

std::vector<double> DiagonalState::block_probs() const {
  std::vector<double> r;
  r.reserve(blocks.size());
  for (const auto& b : blocks) {
    double t = 0.0;
    for (double x : b) t += x;
    r.push_back(t);
  }
  return r;
}

DiagonalState make_state(std::vector<std::vector<double>> blocks, double tol) {
  if (!(tol >= 0.0)) throw std::invalid_argument("make_state: tol must be nonnegative");
  if (blocks.empty()) throw std::invalid_argument("make_state: no blocks");
  double total = 0.0;
  for (auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("make_state: empty block");
    for (double& x : b) {
      if (!std::isfinite(x) || x < -1e-12)
        throw std::invalid_argument("make_state: entries must be nonnegative");
      x = std::max(x, 0.0);
      total += x;
    }
  }
  if (std::abs(total - 1.0) > tol)
    throw std::invalid_argument("make_state: total mass must be 1");
  for (auto& b : blocks)
    for (double& x : b) x /= total;
  return DiagonalState{std::move(blocks)};
}

double classical_entropy(const DiagonalState& w) {
  double h = 0.0;
  for (double r : w.block_probs()) h -= xlogx(r);
  return h;
}

double quantum_entropy(const DiagonalState& w) {
  double s = 0.0;
  for (const auto& b : w.blocks) {
    double r = 0.0, e = 0.0;
    for (double x : b) {
      r += x;
      e -= xlogx(x);
    }
    s += e + xlogx(r);
  }
  return s;
}

DiagonalState thermal_state(const Shape& s, double p) {
  if (std::isnan(p) || !(p >= 1.0))
    throw std::invalid_argument("thermal_state: p must lie in [1, inf]");
  const auto sizes = materialized_sizes(s);
  std::vector<std::vector<double>> blocks(sizes.size());
  if (std::isinf(p)) {
    const std::size_t lmax = sizes.front();
    std::size_t m = 0;
    while (m < sizes.size() && sizes[m] == lmax) ++m;
    const double val = 1.0 / (double(m) * double(lmax));
    for (std::size_t k = 0; k < sizes.size(); ++k)
      blocks[k].assign(sizes[k], k < m ? val : 0.0);
    return make_state(std::move(blocks));
  }
  // Block mass size^p / Z by a shifted softmax: the peak logit cancels
  // exactly against itself, so the masses stay normalized even when p is
  // large enough that log-space differences fall below double resolution.
  std::vector<double> w(sizes.size());
  double peak = -kInf;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    w[k] = p * std::log(double(sizes[k]));
    peak = std::max(peak, w[k]);
  }
  double z = 0.0;
  for (double& x : w) {
    x = std::exp(x - peak);
    z += x;
  }
  for (std::size_t k = 0; k < sizes.size(); ++k)
    blocks[k].assign(sizes[k], w[k] / z / double(sizes[k]));
  return make_state(std::move(blocks));
}

CapacityPoint capacity_point(const Shape& s, double p) {
  if (s.empty()) throw std::invalid_argument("capacity_point: empty shape");
  if (std::isnan(p) || !(p >= 1.0))
    throw std::invalid_argument("capacity_point: p must lie in [1, inf]");
  if (std::isinf(p))
    return {log_big(s.max_part_multiplicity()), log_big(s.max_part())};
  const LogLaplace lap(s);
  const double sq = ell(lap, p - 1.0, 1);
  const double h = ell(lap, p - 1.0, 0) - p * sq;
  return {std::max(h, 0.0), std::max(sq, 0.0)};
}

std::vector<CapacityPoint> region_boundary(const Shape& s, int samples) {
  if (s.empty()) throw std::invalid_argument("region_boundary: empty shape");
  if (samples < 2)
    throw std::invalid_argument("region_boundary: samples must be at least 2");
  std::vector<CapacityPoint> pts;
  pts.push_back({0.0, log_big(s.max_part())});
  pts.push_back(capacity_point(s, kInf));
  if (s.distinct_count() >= 2) {
    // Thermal curve from near-flat (large tilt) down to the slope -1 corner.
    const double bmax = std::max(asymptotic_tilt(LogLaplace(s)), 8.0);
    for (int j = 0; j < samples; ++j) {
      const double beta =
          j + 1 == samples ? 0.0 : bmax * std::pow(1e-6, double(j) / (samples - 1));
      pts.push_back(capacity_point(s, beta + 1.0));
    }
  }
  pts.push_back({log_big(s.total()), 0.0});
  std::vector<CapacityPoint> out;
  for (const auto& pt : pts) {
    if (!out.empty() && std::abs(out.back().classical - pt.classical) <= 1e-12 &&
        std::abs(out.back().quantum - pt.quantum) <= 1e-12)
      continue;
    out.push_back(pt);
  }
  return out;
}

ContainsResult region_contains(const Shape& s, double classical, double quantum,
                               double tol) {
  if (s.empty()) throw std::invalid_argument("region_contains: empty shape");
  if (!std::isfinite(classical) || !std::isfinite(quantum))
    throw std::invalid_argument("region_contains: coordinates must be finite");
  if (!(tol >= 0.0))
    throw std::invalid_argument("region_contains: tol must be nonnegative");
  const LogLaplace lap(s);
  // Slack of the norm constraint at p = beta + 1; its beta -> inf limit is
  // the max-part constraint.
  auto slack = [&](double beta) {
    return (ell(lap, beta, 0) - classical) / (beta + 1.0) - quantum;
  };
  const double bhi = std::clamp(asymptotic_tilt(lap), 63.0, 1e7);
  const double limit = log_big(s.max_part()) - quantum;
  const double worst =
      std::min({classical, quantum, min_over_tilt(slack, bhi, limit).value});
  return {worst >= -tol, worst};
}

SubsetResult region_subset(const Shape& inner, const Shape& outer, int samples,
                           double tol) {
  bool all = true;
  double worst = kInf;
  for (const auto& pt : region_boundary(inner, samples)) {
    const ContainsResult r = region_contains(outer, pt.classical, pt.quantum, tol);
    all = all && r.contained;
    worst = std::min(worst, r.margin);
  }
  return {all, worst};
}

Realization realize_point(const Shape& s, double classical, double quantum,
                          double tol) {
  if (!region_contains(s, classical, quantum, tol).contained)
    throw std::domain_error("realize_point: target lies outside the region");
  const double h = std::max(classical, 0.0);
  const double q = std::max(quantum, 0.0);
  const double tau = h + q;
  const auto sizes = materialized_sizes(s);
  const LogLaplace lap(s);

  // Block-mass entropy of the thermal state at p, summed over distinct
  // sizes.  Same shifted softmax as the materialized state, so the two
  // agree to rounding at every p.
  auto thermal_classical = [&](double p) {
    double peak = -kInf;
    for (const auto& [size, mult] : s.parts())
      peak = std::max(peak, p * log_big(size));
    double z = 0.0;
    for (const auto& [size, mult] : s.parts())
      z += mult.convert_to<double>() * std::exp(p * log_big(size) - peak);
    double hsum = 0.0;
    for (const auto& [size, mult] : s.parts()) {
      const double r = std::exp(p * log_big(size) - peak) / z;
      if (r > 0.0) hsum -= mult.convert_to<double>() * r * std::log(r);
    }
    return hsum;
  };

  // Choose block masses with entropy exactly h (or as close below as the
  // shape allows), leaving the blocks' full in-block room available.
  const double h1 = thermal_classical(1.0);
  const double logm = log_big(s.max_part_multiplicity());
  DiagonalState base;
  if (h >= h1) {
    base = thermal_state(s, 1.0);
  } else if (h >= logm) {
    const double u = bisect(
        [&](double x) { return thermal_classical(1.0 / x) - h; }, 1e-14, 1.0);
    base = thermal_state(s, 1.0 / u);
  } else {
    // Below the flat top: lean a two-level distribution across the largest
    // blocks, one leader against the rest.
    const std::size_t lmax = sizes.front();
    std::size_t m = 0;
    while (m < sizes.size() && sizes[m] == lmax) ++m;
    auto tilt_state = [&](double lead) {
      std::vector<std::vector<double>> blocks(sizes.size());
      for (std::size_t k = 0; k < sizes.size(); ++k) {
        double mass = 0.0;
        if (k == 0)
          mass = lead;
        else if (k < m)
          mass = (1.0 - lead) / double(m - 1);
        blocks[k].assign(sizes[k], mass / double(sizes[k]));
      }
      return make_state(std::move(blocks));
    };
    const double lead =
        bisect([&](double x) { return classical_entropy(tilt_state(x)) - h; },
               1.0 / double(m), 1.0);
    base = tilt_state(lead);
  }

  const double hw = classical_entropy(base);
  const double sw = quantum_entropy(base);  // spectra are uniform here
  const double starget = std::clamp(tau - hw, 0.0, sw);
  DiagonalState out = std::move(base);
  if (sw > 1e-15) {
    // Damp each uniform spectrum toward a point mass until the in-block
    // entropy meets the remainder of the target.
    const auto r = out.block_probs();
    auto damped_quantum = [&](double g) {
      double total = 0.0;
      for (std::size_t k = 0; k < sizes.size(); ++k) {
        const double lam = double(sizes[k]);
        total += r[k] * (-xlogx(g / lam + 1.0 - g) - (lam - 1.0) * xlogx(g / lam));
      }
      return total;
    };
    const double gamma =
        bisect([&](double g) { return damped_quantum(g) - starget; }, 0.0, 1.0);
    std::vector<std::vector<double>> blocks(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      const double lam = double(sizes[k]);
      blocks[k].assign(sizes[k], r[k] * gamma / lam);
      blocks[k][0] = r[k] * (gamma / lam + 1.0 - gamma);
    }
    out = make_state(std::move(blocks));
  }
  const double via = std::max(h - classical_entropy(out), 0.0);
  return {std::move(out), via};
}

}  // namespace qmem
