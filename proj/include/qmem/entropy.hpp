#pragma once

#include <vector>

#include "qmem/shapes.hpp"

namespace qmem {

// A state diagonal in a fixed eigenbasis: one weight vector per block,
// entry j of block k being the probability of eigenvector j there.  After
// make_state the grand total is exactly 1.
struct DiagonalState {
  std::vector<std::vector<double>> blocks;

  Shape shape() const;                      // multiset of block sizes
  std::vector<double> block_probs() const;  // mass per block
};

// Validate (entries >= 0 up to rounding, total within tol of 1) and
// normalize.  Throws invalid_argument on malformed input.
DiagonalState make_state(std::vector<std::vector<double>> blocks,
                         double tol = 1e-9);

// Entropy of the block-mass distribution, in nats.
double classical_entropy(const DiagonalState& w);
// Average conditional entropy within the blocks, in nats.
double quantum_entropy(const DiagonalState& w);

// The norm-achieving state at parameter p in [1, inf]: block masses
// proportional to size^p, uniform spectrum inside each block.  p = inf
// spreads the mass uniformly over the largest blocks.  The state is
// materialized eigenvalue by eigenvalue, so the shape's total dimension is
// budget-guarded.
DiagonalState thermal_state(const Shape& s, double p);

struct CapacityPoint {
  double classical;  // block-mass entropy H, nats
  double quantum;    // in-block entropy S, nats
};

// Entropy pair of the thermal state at p, computed from the shape's
// cumulant function without materializing the state.
CapacityPoint capacity_point(const Shape& s, double p);

// Polyline tracing the upper-right boundary of the region
//   { (H, S) >= 0 : H/p + S <= log |shape|_p for all p in [1, inf] }:
// flat top at S = log(max part) down the thermal curve, then the slope -1
// edge to (log |shape|_1, 0).  Consecutive duplicates are merged.
std::vector<CapacityPoint> region_boundary(const Shape& s, int samples = 128);

struct ContainsResult {
  bool contained;
  double margin;  // smallest slack over all defining constraints, nats
};

ContainsResult region_contains(const Shape& s, double classical,
                               double quantum, double tol = 1e-9);

struct SubsetResult {
  bool subset;
  double margin;  // worst containment margin over the sampled boundary
};

// Is inner's region contained in outer's?  Decided by testing a boundary
// sample of inner against outer's constraints.
SubsetResult region_subset(const Shape& inner, const Shape& outer,
                           int samples = 256, double tol = 1e-9);

struct Realization {
  DiagonalState state;
  // Classical rate carried inside the quantum registers, in nats.
  double classical_via_quantum;
};

// Produce a state accounting for a target point of the region:
//   classical_entropy(state) + classical_via_quantum == classical
//   quantum_entropy(state)  -  classical_via_quantum == quantum
// within 1e-8.  Throws domain_error if the point is outside the region.
Realization realize_point(const Shape& s, double classical, double quantum,
                          double tol = 1e-9);

}  // namespace qmem
