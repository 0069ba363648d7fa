#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qmem/packing.hpp"
#include "qmem/shapes.hpp"

namespace qmem {

// The measure attached to a shape: one atom per distinct part size, at
// position log(size), with weight size * multiplicity.  Its cumulant
// generating function ell(beta) = log sum_i w_i e^{beta x_i} satisfies
// ell(beta) = (beta + 1) * log_p_norm(shape, beta + 1) and is additive
// under tensor products.
struct LogLaplace {
  std::vector<double> position;    // log part size, ascending
  std::vector<double> log_weight;  // log(size * multiplicity)

  explicit LogLaplace(const Shape& s);
};

// ell and its first two derivatives at beta.  order 0 gives the value,
// 1 the mean of the exponentially tilted atom distribution, 2 its variance.
double ell(const LogLaplace& lap, double beta, int order);
double ell(const Shape& s, double beta, int order);

// Tilt beyond which the measure concentrates on its largest atom to within
// ~e^-30, so large-p behavior is settled; zero for a single-atom measure.
double asymptotic_tilt(const LogLaplace& lap);

struct TiltMinimum {
  double value;
  double beta;  // inf when the beta -> inf limit is the minimum
};

// Minimum of a smooth function over beta in [0, beta_hi] together with its
// beta -> inf limit: dense geometric grid, golden-section refinement of
// local minima, the limit as final candidate.  Non-finite samples are
// skipped, so functions may blow up at isolated points.
TiltMinimum min_over_tilt(const std::function<double(double)>& f,
                          double beta_hi, double limit);

struct LegendrePoint {
  double value;  // inf_{beta >= 0} ell(beta) - beta * t
  double beta;   // minimizer
};

// Minimize ell(beta) - beta * t over beta >= 0.  The minimizer solves
// ell'(beta) = t when t > ell'(0) and sits at beta = 0 otherwise.
// t must be strictly below log(max part); beyond it the infimum is -inf.
LegendrePoint legendre(const Shape& s, double t);

// log of the Chernoff bound: n * (ell(beta*) - beta* t).  Upper-bounds
// log of the mass of parts of the n-th tensor power of size >= e^{n t}.
double log_chernoff_upper(const Shape& s, unsigned n, double t);
double chernoff_upper(const Shape& s, unsigned n, double t);

// Window lower bound: mass of parts of size >= e^{n (t - slack)} is at
// least e^{n (ell(b) - b t - b slack)} * (1 - ell''(b) / (n slack^2)) with
// b the Legendre minimizer at t.  Requires ell'(0) <= t < log(max part)
// and 0 < slack.  The bracket can be <= 0, making the bound vacuous.
struct LogLowerBound {
  double log_main;  // n * (ell(b) - b t - b slack)
  double bracket;   // 1 - ell''(b) / (n slack^2)
};
LogLowerBound log_cramer_lower(const Shape& s, unsigned n, double t,
                               double slack);
// exp(log_main) * bracket when the bracket is positive, 0 otherwise.
double cramer_lower(const Shape& s, unsigned n, double t, double slack);

// Exact mass of parts of the n-th tensor power of size >= e^{n t},
// computed in integer arithmetic with the threshold compared in log space.
// Throws BudgetExceeded if the power accumulates more than max_distinct
// distinct part sizes while being built.
BigInt exact_tail(const Shape& s, unsigned n, double t,
                  std::size_t max_distinct = 4'000'000);

enum class BulkStatus { Holds, Violated, Marginal };

struct BulkVerdict {
  BulkStatus status;
  double margin;     // min over p in [1, inf] of log|b|_p - log|a|_p
  double witness_p;  // where the minimum is (approximately) attained
};

// Decide whether every p-norm of a is dominated by that of b.  margin
// within tol of zero reports Marginal; the caller sees the worst p either
// way.  witness_p may be infinity.
BulkVerdict bulk_check(const Shape& a, const Shape& b, double tol = 1e-9);

// Smallest n for which the Gaussian-window argument proves that twice the
// n-th power of a is supermajorized by the n-th power of b:
//   2 sqrt(2C/n) + 2 log(2) / n <= min_{beta>0} (ell_b - ell_a)(beta)/beta
// with C the largest variance of b's tilted measure, together with the
// below-the-mean branch n (ell_b(0) - ell_a(0)) >= log 4.  For a pair of
// classical shapes the comparison degenerates to 1-norms and the exact
// smallest n is returned.  Empty when strict domination fails somewhere.
std::optional<unsigned> analytic_n_bound(const Shape& a, const Shape& b);

struct BulkEmbedding {
  unsigned n;  // tensor power of a
  unsigned m;  // tensor power of b, m = ceil(n * (1 + eps))
  BratteliDiagram certificate;
};

// Search n = 1..n_max for a verified embedding of the n-th power of a into
// the ceil(n(1+eps))-th power of b: doubled-tail domination first (exact),
// then the greedy packing, then certificate verification.  eps is a
// positive rational eps_num/eps_den.  Errors if bulk_check(a, b) is
// Violated; empty if no n within the cap works.
std::optional<BulkEmbedding> bulk_construct(const Shape& a, const Shape& b,
                                            const BigInt& eps_num,
                                            const BigInt& eps_den,
                                            unsigned n_max);

}  // namespace qmem
