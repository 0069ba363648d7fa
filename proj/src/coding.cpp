#include "qmem/coding.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>

#include "qmem/errors.hpp"
#include "qmem/largedev.hpp"

namespace qmem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, int iters) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (b - a <= 1e-14 * (1.0 + std::abs(a) + std::abs(b))) break;
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

std::vector<std::ptrdiff_t> block_sizes_of(const Shape& s) {
  std::vector<std::ptrdiff_t> sizes;
  for (const auto& part : s.expanded())
    sizes.push_back(part.convert_to<std::ptrdiff_t>());
  return sizes;
}

}  // namespace

void validate_channel(const Channel& c) {
  if (c.from_shape.empty() || c.to_shape.empty())
    throw std::invalid_argument("channel: empty shape");
  const auto from_sizes = block_sizes_of(c.from_shape);
  const auto to_sizes = block_sizes_of(c.to_shape);
  if (c.kraus.size() != to_sizes.size())
    throw std::invalid_argument("channel: to-block index range mismatch");
  for (std::size_t j = 0; j < to_sizes.size(); ++j) {
    if (c.kraus[j].size() != from_sizes.size())
      throw std::invalid_argument("channel: from-block index range mismatch");
    for (std::size_t k = 0; k < from_sizes.size(); ++k)
      for (const auto& m : c.kraus[j][k])
        if (m.rows() != from_sizes[k] || m.cols() != to_sizes[j])
          throw std::invalid_argument("channel: kraus dimension mismatch");
  }
}

double subunital_slack(const Channel& c) {
  validate_channel(c);
  const auto to_sizes = block_sizes_of(c.to_shape);
  double slack = kInf;
  for (std::size_t j = 0; j < to_sizes.size(); ++j) {
    Eigen::MatrixXcd m =
        Eigen::MatrixXcd::Identity(to_sizes[j], to_sizes[j]);
    for (const auto& ops : c.kraus[j])
      for (const auto& kop : ops) m -= kop.adjoint() * kop;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m,
                                                       Eigen::EigenvaluesOnly);
    slack = std::min(slack, es.eigenvalues().minCoeff());
  }
  return slack;
}

bool is_subunital(const Channel& c, double tol) {
  return subunital_slack(c) >= -tol;
}

Channel identity_channel(const Shape& s) {
  if (s.empty()) throw std::invalid_argument("identity_channel: empty shape");
  const auto sizes = block_sizes_of(s);
  Channel c{s, s, {}};
  c.kraus.resize(sizes.size());
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    c.kraus[j].resize(sizes.size());
    c.kraus[j][j].push_back(Eigen::MatrixXcd::Identity(sizes[j], sizes[j]));
  }
  return c;
}

Channel random_subunital_channel(const Shape& from, const Shape& to, int rank,
                                 std::uint64_t seed) {
  if (from.empty() || to.empty())
    throw std::invalid_argument("random_subunital_channel: empty shape");
  if (rank < 1)
    throw std::invalid_argument("random_subunital_channel: rank must be positive");
  if (from.total() > 100'000 || to.total() > 100'000)
    throw BudgetExceeded("random_subunital_channel: shape dimension out of reach");
  std::mt19937_64 rng(seed);
  auto unit = [&]() { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; };
  auto gauss = [&]() {
    const double u1 = unit(), u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi_v<double> * u2);
  };
  const auto from_sizes = block_sizes_of(from);
  const auto to_sizes = block_sizes_of(to);
  Channel c{from, to, {}};
  c.kraus.resize(to_sizes.size());
  for (std::size_t j = 0; j < to_sizes.size(); ++j) {
    c.kraus[j].resize(from_sizes.size());
    for (std::size_t k = 0; k < from_sizes.size(); ++k)
      for (int l = 0; l < rank; ++l) {
        Eigen::MatrixXcd m(from_sizes[k], to_sizes[j]);
        for (std::ptrdiff_t r = 0; r < m.rows(); ++r)
          for (std::ptrdiff_t col = 0; col < m.cols(); ++col)
            m(r, col) = std::complex<double>(gauss(), gauss());
        c.kraus[j][k].push_back(std::move(m));
      }
  }
  // Rescale so the largest block of sum K*K sits strictly inside the unit
  // ball, which makes the subunital slack positive by construction.
  double lam = 0.0;
  for (std::size_t j = 0; j < to_sizes.size(); ++j) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(to_sizes[j], to_sizes[j]);
    for (const auto& ops : c.kraus[j])
      for (const auto& kop : ops) m += kop.adjoint() * kop;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m,
                                                       Eigen::EigenvaluesOnly);
    lam = std::max(lam, es.eigenvalues().maxCoeff());
  }
  if (lam > 0.0) {
    const double scale = 1.0 / std::sqrt(lam * (1.0 + 1e-6));
    for (auto& row : c.kraus)
      for (auto& ops : row)
        for (auto& kop : ops) kop *= scale;
  }
  return c;
}

double dense_sup(const DiagonalState& rho) {
  double best = 0.0;
  for (const auto& b : rho.blocks) {
    double r = 0.0, top = 0.0;
    for (double x : b) {
      r += x;
      top = std::max(top, x);
    }
    if (r > 0.0) best = std::max(best, top * top / r);
  }
  if (!(best > 0.0)) throw std::invalid_argument("dense_sup: state carries no mass");
  return best;
}

BoundPoint log_holder_bound(const DiagonalState& rho, const Shape& b,
                            std::optional<double> p) {
  if (b.empty()) throw std::invalid_argument("log_holder_bound: empty shape");
  const Shape a = rho.shape();
  const double logd = std::log(dense_sup(rho));
  // In terms of u = 1/p, the conjugate exponent is 1/(1-u).
  auto at = [&](double u) {
    const double pe = u > 0.0 ? 1.0 / u : kInf;
    const double qe = u < 1.0 ? 1.0 / (1.0 - u) : kInf;
    return logd + log_p_norm(a, qe) + log_p_norm(b, pe);
  };
  if (p) {
    if (std::isnan(*p) || !(*p >= 1.0))
      throw std::invalid_argument("log_holder_bound: p must lie in [1, inf]");
    const double u = std::isinf(*p) ? 0.0 : 1.0 / *p;
    return {at(u), *p};
  }
  const int grid = 257;
  double best = kInf, barg = 0.0;
  std::vector<double> us(grid), vals(grid);
  for (int i = 0; i < grid; ++i) {
    us[i] = double(i) / (grid - 1);
    vals[i] = at(us[i]);
    if (vals[i] < best) {
      best = vals[i];
      barg = us[i];
    }
  }
  for (int i = 1; i + 1 < grid; ++i)
    if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) {
      auto [x, v] = golden_min(at, us[i - 1], us[i + 1], 120);
      if (v < best) {
        best = v;
        barg = x;
      }
    }
  return {best, barg > 0.0 ? 1.0 / barg : kInf};
}

double holder_bound(const DiagonalState& rho, const Shape& b,
                    std::optional<double> p) {
  return std::exp(log_holder_bound(rho, b, p).log_value);
}

double coding_fidelity(const DiagonalState& rho, const Channel& decode,
                       const Channel& encode) {
  validate_channel(decode);
  validate_channel(encode);
  if (!(encode.to_shape == decode.from_shape) ||
      !(decode.to_shape == encode.from_shape))
    throw std::invalid_argument("coding_fidelity: channel shapes do not compose");
  const auto a_sizes = block_sizes_of(decode.from_shape);
  if (rho.blocks.size() != a_sizes.size())
    throw std::invalid_argument("coding_fidelity: state does not match the channels");
  for (std::size_t k = 0; k < a_sizes.size(); ++k)
    if (std::ptrdiff_t(rho.blocks[k].size()) != a_sizes[k])
      throw std::invalid_argument(
          "coding_fidelity: state blocks must follow descending block order");
  if (!is_subunital(decode) || !is_subunital(encode))
    throw std::invalid_argument("coding_fidelity: channel is not subunital");
  const auto rk = rho.block_probs();
  const std::size_t bcount = decode.kraus.size();
  double f = 0.0;
  for (std::size_t k = 0; k < a_sizes.size(); ++k) {
    if (!(rk[k] > 0.0)) continue;
    for (std::size_t j = 0; j < bcount; ++j)
      for (const auto& y : decode.kraus[j][k])
        for (const auto& x : encode.kraus[k][j]) {
          const Eigen::MatrixXcd m = y * x;
          std::complex<double> val = 0.0;
          for (std::ptrdiff_t i = 0; i < m.rows(); ++i)
            val += (rho.blocks[k][std::size_t(i)] / rk[k]) * m(i, i);
          f += rk[k] * std::norm(val);
        }
  }
  return std::clamp(f, 0.0, 1.0);
}

TypicalSummary typical_algebra(const DiagonalState& rho, unsigned n,
                               double alpha) {
  if (n == 0) throw std::invalid_argument("typical_algebra: n must be positive");
  if (!(alpha > 0.0))
    throw std::invalid_argument("typical_algebra: alpha must be positive");
  // Flatten the (block, eigenvector) alphabet.
  std::vector<double> cell_r;
  std::vector<std::size_t> cell_block;
  for (std::size_t k = 0; k < rho.blocks.size(); ++k)
    for (double x : rho.blocks[k]) {
      cell_r.push_back(x);
      cell_block.push_back(k);
    }
  const std::size_t d = cell_r.size();
  if (d == 0) throw std::invalid_argument("typical_algebra: empty state");
  if (binomial(n + unsigned(d) - 1, unsigned(d) - 1) > 5'000'000)
    throw BudgetExceeded("typical_algebra: too many occupation classes");

  struct Acc {
    BigInt dim = 0;   // typical eigenvectors per sequence of this class
    BigInt mult = 0;  // block sequences of this class
    std::vector<double> log_mass;
    double max_log_v = -std::numeric_limits<double>::infinity();
  };
  std::map<std::vector<unsigned>, Acc> types;
  double prob = 0.0;
  std::vector<unsigned> counts(d, 0);

  auto process = [&]() {
    std::vector<unsigned> bt(rho.blocks.size(), 0);
    for (std::size_t c = 0; c < d; ++c) bt[cell_block[c]] += counts[c];
    BigInt cn = 1;
    {
      std::size_t c = 0;
      for (std::size_t k = 0; k < rho.blocks.size(); ++k) {
        std::vector<unsigned> local(rho.blocks[k].size());
        for (unsigned& v : local) v = counts[c++];
        cn *= multinomial(bt[k], local);
      }
    }
    double logv = 0.0;
    bool vpos = true;
    for (std::size_t c = 0; c < d && vpos; ++c) {
      if (counts[c] == 0) continue;
      if (cell_r[c] <= 0.0)
        vpos = false;
      else
        logv += double(counts[c]) * std::log(cell_r[c]);
    }
    Acc& acc = types[bt];
    if (acc.mult == 0) acc.mult = multinomial(n, bt);
    acc.dim += cn;
    if (vpos) {
      prob += std::exp(log_big(multinomial(n, counts)) + logv);
      acc.log_mass.push_back(log_big(cn) + logv);
      acc.max_log_v = std::max(acc.max_log_v, logv);
    }
  };

  auto typical_cell = [&](std::size_t c, unsigned v) {
    return std::abs(double(v) / double(n) - cell_r[c]) < alpha;
  };
  std::function<void(std::size_t, unsigned)> walk = [&](std::size_t c,
                                                        unsigned left) {
    if (c + 1 == d) {
      if (typical_cell(c, left)) {
        counts[c] = left;
        process();
      }
      return;
    }
    for (unsigned v = 0; v <= left; ++v) {
      if (!typical_cell(c, v)) continue;
      counts[c] = v;
      walk(c + 1, left - v);
    }
    counts[c] = 0;
  };
  walk(0, n);

  TypicalSummary out;
  out.n = n;
  out.alpha = alpha;
  out.prob_typ = std::min(prob, 1.0);
  if (types.empty()) {
    out.log_block_count = -kInf;
    out.log_dense_sup = -kInf;
    return out;
  }
  Shape::Map sizes;
  double best = -kInf;
  for (const auto& [bt, acc] : types) {
    sizes[acc.dim] += acc.mult;
    if (!acc.log_mass.empty()) {
      double peak = -kInf;
      for (double lm : acc.log_mass) peak = std::max(peak, lm);
      double z = 0.0;
      for (double lm : acc.log_mass) z += std::exp(lm - peak);
      best = std::max(best, 2.0 * acc.max_log_v - (peak + std::log(z)));
    }
  }
  out.shape_typ = Shape::from_counts(sizes);
  out.log_block_count = log_big(out.shape_typ.part_count());
  out.log_dense_sup =
      prob > 0.0 && std::isfinite(best) ? best - std::log(prob) : -kInf;
  return out;
}

bool verify_typical_bounds(const TypicalSummary& summary, double classical,
                           double quantum, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("verify_typical_bounds: eps must be positive");
  const double n = double(summary.n);
  bool ok = std::abs(summary.log_block_count - classical * n) < n * eps;
  for (const auto& [size, mult] : summary.shape_typ.parts())
    ok = ok && std::abs(log_big(size) - quantum * n) < n * eps;
  ok = ok && summary.log_dense_sup + (classical + 2.0 * quantum) * n < n * eps;
  return ok;
}

ContainsResult code_feasible(const DiagonalState& rho, const Shape& b,
                             double tol) {
  return region_contains(b, classical_entropy(rho), quantum_entropy(rho), tol);
}

double nogo_rate(const DiagonalState& rho, const Shape& b, double delta) {
  if (b.empty()) throw std::invalid_argument("nogo_rate: empty shape");
  if (std::isnan(delta) || !(delta >= 0.0) || std::isinf(delta))
    throw std::invalid_argument("nogo_rate: delta must be a nonnegative real");
  const double h = classical_entropy(rho);
  const double s = quantum_entropy(rho);
  const LogLaplace lb(b);
  // Negated constraint slack against the delta-inflated target; the best
  // decay rate is minus its minimum over the exponent range.
  auto f = [&](double beta) {
    return ((1.0 + delta) * ell(lb, beta, 0) - h) / (beta + 1.0) - s;
  };
  const double bhi = std::clamp(asymptotic_tilt(lb), 63.0, 1e7);
  const double limit = (1.0 + delta) * log_big(b.max_part()) - s;
  return -min_over_tilt(f, bhi, limit).value;
}

}  // namespace qmem
