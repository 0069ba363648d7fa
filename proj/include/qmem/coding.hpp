#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qmem/entropy.hpp"
#include "qmem/shapes.hpp"

namespace qmem {

// Completely positive subunital map between hybrid algebras, in Kraus form.
// Blocks on both sides are indexed in descending-size order (the order of
// Shape::expanded).  kraus[j][k] lists the operators tied to to-block j and
// from-block k; each is a (from-block size) x (to-block size) complex
// matrix, and the map carries a to-algebra observable M = (M_j) to the
// from-algebra observable with k-block sum_{j,l} K_{j,k,l} M_j K*_{j,k,l}.
struct Channel {
  Shape from_shape;
  Shape to_shape;
  std::vector<std::vector<std::vector<Eigen::MatrixXcd>>> kraus;
};

// Throws invalid_argument unless the kraus index ranges and matrix
// dimensions match the two shapes.
void validate_channel(const Channel& c);

// Smallest eigenvalue of I - sum_{k,l} K*K over all to-blocks; the map is
// subunital when this is nonnegative up to rounding.
double subunital_slack(const Channel& c);
bool is_subunital(const Channel& c, double tol = 1e-9);

// Identity map on s: one identity Kraus operator per matching block pair.
Channel identity_channel(const Shape& s);

// Deterministic pseudo-random subunital channel: Gaussian Kraus entries,
// `rank` operators per block pair, rescaled so the largest block of
// sum K*K has operator norm strictly below 1.
Channel random_subunital_channel(const Shape& from, const Shape& to, int rank,
                                 std::uint64_t seed);

// Largest eigenvalue-squared-to-block-mass ratio max_{k,j} r_{k,j}^2 / r_k
// over blocks with positive mass.
double dense_sup(const DiagonalState& rho);

struct BoundPoint {
  double log_value;
  double p;  // the exponent the bound was evaluated (or minimized) at
};

// Fidelity ceiling for coding rho through algebra b: the product of
// dense_sup(rho), the conjugate norm of rho's shape, and the p-norm of b.
// p = nullopt minimizes the bound over the whole exponent range.
BoundPoint log_holder_bound(const DiagonalState& rho, const Shape& b,
                            std::optional<double> p);
double holder_bound(const DiagonalState& rho, const Shape& b,
                    std::optional<double> p);

// Exact fidelity of encode-then-decode on rho from the Kraus data.  decode
// consumes b-observables into a-observables, encode the reverse; rho's
// blocks must follow the canonical descending order.
double coding_fidelity(const DiagonalState& rho, const Channel& decode,
                       const Channel& encode);

// The block structure that the alpha-typical eigenvectors of the n-fold
// product state span, with its exact census.
struct TypicalSummary {
  unsigned n = 0;
  double alpha = 0.0;
  // Block size = typical eigenvectors per typical block sequence,
  // multiplicity = number of block sequences of that occupation class.
  Shape shape_typ;
  double prob_typ = 0.0;        // mass the typical projector captures
  double log_block_count = 0.0; // log of shape_typ's part count
  double log_dense_sup = 0.0;   // dense_sup of the renormalized cut-down
};

// Exact census of the alpha-typical subalgebra of rho^(x n) by enumerating
// occupation classes over the (block, eigenvector) alphabet with
// big-integer counts; never touches raw sequences.
TypicalSummary typical_algebra(const DiagonalState& rho, unsigned n,
                               double alpha);

// The three defining estimates of a typical subalgebra at slack eps:
// block count close to n*classical, every block size close to n*quantum,
// and the dense-coding supremum small accordingly.
bool verify_typical_bounds(const TypicalSummary& summary, double classical,
                           double quantum, double eps);

// Can rho be coded reliably through copies of b?  Decided by membership of
// rho's entropy pair in b's capacity region.
ContainsResult code_feasible(const DiagonalState& rho, const Shape& b,
                             double tol = 1e-9);

// Best exponential decay rate of coding fidelity for an infeasible source,
// with the target algebra inflated by delta; <= 0 when no decay is forced.
double nogo_rate(const DiagonalState& rho, const Shape& b, double delta);

}  // namespace qmem
