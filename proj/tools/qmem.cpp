#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmem/coding.hpp"
#include "qmem/entropy.hpp"
#include "qmem/errors.hpp"
#include "qmem/largedev.hpp"
#include "qmem/packing.hpp"
#include "qmem/shapes.hpp"

using nlohmann::json;
using namespace qmem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Options {
  std::string a, b, shape, state, channels, out;
  std::string p_list = "1,2,inf";
  std::string p_single;
  std::string epsilon = "1/4";
  double tol = 1e-9;
  double alpha = 0.0;
  double classical = 0.0;
  double quantum = 0.0;
  unsigned n = 0;
  unsigned grid = 50;
  unsigned max_n = 4096;
  int samples = 128;
  int threads = 1;
  std::uint64_t node_budget = 0;  // 0 = default / QMEM_BUDGET
  std::uint64_t seed = 0;
  bool bits = false;
};

double unit(double x, bool bits) { return bits ? x / std::log(2.0) : x; }

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_p(const std::string& tok) {
  if (tok == "inf" || tok == "Inf" || tok == "INF") return kInf;
  double v = 0.0;
  std::size_t pos = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (...) {
    throw std::invalid_argument("p: not a number: " + tok);
  }
  if (pos != tok.size())
    throw std::invalid_argument("p: trailing characters: " + tok);
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::pair<BigInt, BigInt> parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return {BigInt(text), BigInt(1)};
  return {BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1))};
}

std::optional<std::uint64_t> budget_env() {
  const char* e = std::getenv("QMEM_BUDGET");
  if (!e || !*e) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(e, &end, 10);
  if (end == e || *end)
    throw std::invalid_argument("QMEM_BUDGET must be a positive integer");
  return v;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << "\n";
  } else {
    std::ofstream f(out);
    if (!f) throw std::invalid_argument("cannot write " + out);
    f << text;
    if (text.empty() || text.back() != '\n') f << "\n";
  }
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);
  json j;
  f >> j;
  return j;
}

// State files carry one entry per block; blocks are sorted into the canonical
// descending-size order on the way in.
DiagonalState read_state(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.contains("blocks") || !j.at("blocks").is_array())
    throw std::invalid_argument(path + ": expected {\"blocks\": [...]}");
  struct Row {
    std::size_t size;
    std::vector<double> w;
  };
  std::vector<Row> rows;
  for (const json& b : j.at("blocks")) {
    Row r;
    r.size = b.at("size").get<std::size_t>();
    r.w = b.at("weights").get<std::vector<double>>();
    if (r.w.size() != r.size)
      throw std::invalid_argument(path + ": weights length must equal size");
    rows.push_back(std::move(r));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& x, const Row& y) { return x.size > y.size; });
  std::vector<std::vector<double>> blocks;
  blocks.reserve(rows.size());
  for (Row& r : rows) blocks.push_back(std::move(r.w));
  return make_state(std::move(blocks));
}

json state_json(const DiagonalState& st) {
  json blocks = json::array();
  for (const auto& b : st.blocks)
    blocks.push_back(json{{"size", b.size()}, {"weights", b}});
  return json{{"blocks", blocks}};
}

Eigen::MatrixXcd read_matrix(const json& op) {
  const auto rows = op.at("rows").get<std::ptrdiff_t>();
  const auto cols = op.at("cols").get<std::ptrdiff_t>();
  const json& e = op.at("entries");
  if (std::ptrdiff_t(e.size()) != rows)
    throw std::invalid_argument("channel: entries row count mismatch");
  Eigen::MatrixXcd m(rows, cols);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const json& row = e.at(r);
    if (std::ptrdiff_t(row.size()) != cols)
      throw std::invalid_argument("channel: entries column count mismatch");
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      const json& cell = row.at(c);
      if (!cell.is_array() || cell.size() != 2)
        throw std::invalid_argument("channel: entries must be [re, im] pairs");
      m(r, c) = std::complex<double>(cell.at(0).get<double>(),
                                     cell.at(1).get<double>());
    }
  }
  return m;
}

Channel read_channel(const json& j) {
  Channel c{Shape::parse(j.at("from").get<std::string>()),
            Shape::parse(j.at("to").get<std::string>()),
            {}};
  const std::size_t nf = c.from_shape.expanded().size();
  const std::size_t nt = c.to_shape.expanded().size();
  struct Op {
    std::size_t l;
    Eigen::MatrixXcd m;
  };
  std::vector<std::vector<std::vector<Op>>> hold(
      nt, std::vector<std::vector<Op>>(nf));
  for (const json& op : j.at("kraus")) {
    const auto jj = op.at("j").get<std::size_t>();
    const auto kk = op.at("k").get<std::size_t>();
    const auto ll = op.at("l").get<std::size_t>();
    if (jj >= nt || kk >= nf)
      throw std::invalid_argument("channel: kraus block index out of range");
    hold[jj][kk].push_back({ll, read_matrix(op)});
  }
  c.kraus.assign(nt, {});
  for (std::size_t jj = 0; jj < nt; ++jj) {
    c.kraus[jj].resize(nf);
    for (std::size_t kk = 0; kk < nf; ++kk) {
      auto& ops = hold[jj][kk];
      std::sort(ops.begin(), ops.end(),
                [](const Op& x, const Op& y) { return x.l < y.l; });
      for (std::size_t l = 0; l < ops.size(); ++l) {
        if (ops[l].l != l)
          throw std::invalid_argument(
              "channel: kraus l indices must be 0..count-1 per (j, k)");
        c.kraus[jj][kk].push_back(std::move(ops[l].m));
      }
    }
  }
  validate_channel(c);
  return c;
}

json diagram_json(const BratteliDiagram& d) {
  json sizes = json::array();
  for (const BigInt& x : d.block_sizes) sizes.push_back(x.str());
  json groups = json::array();
  for (const BinGroup& g : d.groups) {
    json placed = json::array();
    for (const BigInt& x : g.placed) placed.push_back(x.str());
    groups.push_back(json{{"bin_size", g.bin_size.str()},
                          {"count", g.count.str()},
                          {"placed", placed}});
  }
  return json{{"block_sizes", sizes}, {"groups", groups}};
}

int run_norms(const Options& o) {
  const Shape s = Shape::parse(o.shape);
  json norms = json::object();
  for (const std::string& tok : split_list(o.p_list))
    norms[tok] = unit(log_p_norm(s, parse_p(tok)), o.bits);
  emit(json{{"log_norms", norms}}.dump(2), o.out);
  return 0;
}

int run_embed(const Options& o) {
  const Shape a = Shape::parse(o.a);
  const Shape b = Shape::parse(o.b);
  const std::uint64_t budget =
      o.node_budget > 0 ? o.node_budget : budget_env().value_or(10'000'000);
  const EmbedResult r = decide_embed(a, b, budget);
  json j{{"nodes_explored", r.nodes_explored}};
  int rc = 0;
  switch (r.status) {
    case EmbedStatus::Embeddable:
      j["embeddable"] = true;
      j["diagram"] = diagram_json(*r.diagram);
      rc = 0;
      break;
    case EmbedStatus::NotEmbeddable:
      j["embeddable"] = false;
      rc = 2;
      break;
    case EmbedStatus::Unknown:
      j["embeddable"] = nullptr;
      j["verdict"] = "unknown";
      rc = 3;
      break;
  }
  emit(j.dump(2), o.out);
  return rc;
}

int run_supermajorize(const Options& o) {
  const Shape a = Shape::parse(o.a);
  const Shape b = Shape::parse(o.b);
  const bool yes = supermajorizes(b, a);
  emit(json{{"a", a.str()}, {"b", b.str()}, {"supermajorizes", yes}}.dump(2),
       o.out);
  return yes ? 0 : 2;
}

int run_bulk_check(const Options& o) {
  const Shape a = Shape::parse(o.a);
  const Shape b = Shape::parse(o.b);
  const BulkVerdict v = bulk_check(a, b, o.tol);
  json j{{"margin", unit(v.margin, o.bits)}};
  if (std::isfinite(v.witness_p))
    j["witness_p"] = v.witness_p;
  else
    j["witness_p"] = "inf";
  switch (v.status) {
    case BulkStatus::Holds:
      j["status"] = "Holds";
      break;
    case BulkStatus::Marginal:
      j["status"] = "Marginal";
      break;
    case BulkStatus::Violated:
      j["status"] = "Violated";
      break;
  }
  emit(j.dump(2), o.out);
  return v.status == BulkStatus::Violated ? 2 : 0;
}

int run_bulk_construct(const Options& o) {
  const Shape a = Shape::parse(o.a);
  const Shape b = Shape::parse(o.b);
  if (bulk_check(a, b).status == BulkStatus::Violated) {
    emit(json{{"found", false}, {"reason", "p-norm domination is violated"}}
             .dump(2),
         o.out);
    return 2;
  }
  const auto [num, den] = parse_rational(o.epsilon);
  const auto r = bulk_construct(a, b, num, den, o.max_n);
  if (!r) {
    emit(json{{"found", false},
              {"reason", "no tensor power within --max-n admits a verified "
                         "certificate"}}
             .dump(2),
         o.out);
    return 3;
  }
  BigInt bins = 0;
  for (const BinGroup& g : r->certificate.groups) bins += g.count;
  json j{{"found", true},
         {"n", r->n},
         {"m", r->m},
         {"certificate_summary",
          json{{"group_count", r->certificate.groups.size()},
               {"bin_count", bins.str()}}}};
  emit(j.dump(2), o.out);
  return 0;
}

int run_capacity(const Options& o) {
  const Shape s = Shape::parse(o.shape);
  const auto pts = region_boundary(s, o.samples);
  std::ostringstream csv;
  csv << "H,S\n";
  for (const CapacityPoint& p : pts)
    csv << fmt(unit(p.classical, o.bits)) << "," << fmt(unit(p.quantum, o.bits))
        << "\n";
  emit(csv.str(), o.out);
  return 0;
}

int run_entropy(const Options& o) {
  const DiagonalState st = read_state(o.state);
  if (!o.shape.empty() && !(Shape::parse(o.shape) == st.shape()))
    throw std::invalid_argument("state blocks do not match --shape");
  emit(json{{"classical", unit(classical_entropy(st), o.bits)},
            {"quantum", unit(quantum_entropy(st), o.bits)}}
           .dump(2),
       o.out);
  return 0;
}

int run_thermal(const Options& o) {
  const Shape s = Shape::parse(o.shape);
  const DiagonalState st = thermal_state(s, parse_p(o.p_single));
  emit(state_json(st).dump(2), o.out);
  return 0;
}

int run_region_contains(const Options& o) {
  const Shape s = Shape::parse(o.shape);
  const double h = o.bits ? o.classical * std::log(2.0) : o.classical;
  const double q = o.bits ? o.quantum * std::log(2.0) : o.quantum;
  const ContainsResult r = region_contains(s, h, q, o.tol);
  emit(json{{"contained", r.contained}, {"margin", unit(r.margin, o.bits)}}
           .dump(2),
       o.out);
  return r.contained ? 0 : 2;
}

int run_region_subset(const Options& o) {
  const Shape inner = Shape::parse(o.a);
  const Shape outer = Shape::parse(o.b);
  const SubsetResult r = region_subset(inner, outer, o.samples, o.tol);
  emit(json{{"subset", r.subset}, {"margin", unit(r.margin, o.bits)}}.dump(2),
       o.out);
  return r.subset ? 0 : 2;
}

int run_typical(const Options& o) {
  const DiagonalState st = read_state(o.state);
  if (!o.shape.empty() && !(Shape::parse(o.shape) == st.shape()))
    throw std::invalid_argument("state blocks do not match --shape");
  const TypicalSummary ts = typical_algebra(st, o.n, o.alpha);
  json counts = json::object();
  for (const auto& [size, mult] : ts.shape_typ.parts())
    counts[size.str()] = mult.str();
  json j{{"n", ts.n},
         {"alpha", ts.alpha},
         {"prob_typ", ts.prob_typ},
         {"log_block_count", unit(ts.log_block_count, o.bits)},
         {"log_dense_sup", unit(ts.log_dense_sup, o.bits)},
         {"shape_typ", ts.shape_typ.str()},
         {"shape_counts", counts}};
  emit(j.dump(2), o.out);
  return 0;
}

int run_bound(const Options& o) {
  const DiagonalState st = read_state(o.state);
  if (!o.a.empty() && !(Shape::parse(o.a) == st.shape()))
    throw std::invalid_argument("state blocks do not match --shape-a");
  const Shape b = Shape::parse(o.b);
  std::optional<double> p;
  if (!o.p_single.empty()) p = parse_p(o.p_single);
  const BoundPoint bp = log_holder_bound(st, b, p);
  json j{{"bound", std::exp(bp.log_value)},
         {"log_bound", unit(bp.log_value, o.bits)}};
  if (std::isfinite(bp.p))
    j["best_p"] = bp.p;
  else
    j["best_p"] = "inf";
  emit(j.dump(2), o.out);
  return 0;
}

int run_fidelity(const Options& o) {
  const DiagonalState st = read_state(o.state);
  const json j = read_json_file(o.channels);
  const Channel decode = read_channel(j.at("decode"));
  const Channel encode = read_channel(j.at("encode"));
  emit(json{{"fidelity", coding_fidelity(st, decode, encode)}}.dump(2), o.out);
  return 0;
}

int run_sandwich(const Options& o) {
  const Shape s = Shape::parse(o.shape);
  if (o.n == 0) throw std::invalid_argument("sandwich: --n must be positive");
  if (o.grid == 0)
    throw std::invalid_argument("sandwich: --grid must be positive");
  if (s.distinct_count() < 2) {
    emit(json{{"message",
               "degenerate spectrum: every part has the same size, so the "
               "tail mass is a single step at that log-size"}}
             .dump(2),
         o.out);
    return 0;
  }
  const LogLaplace lap(s);
  const double mean = ell(lap, 0.0, 1);
  const double logmax = log_big(s.max_part());
  const double bhi = std::max(asymptotic_tilt(lap), 1.0);
  double c2 = 0.0;
  for (int i = 0; i <= 256; ++i)
    c2 = std::max(c2, ell(lap, std::min(8.0, bhi) * i / 256.0, 2));
  for (int i = 0; i <= 128; ++i)
    c2 = std::max(c2, ell(lap, 1e-3 * std::pow(bhi / 1e-3, i / 128.0), 2));
  // Window half-width chosen so the probability bracket stays >= 1/2.
  const double slack = std::sqrt(2.0 * c2 / double(o.n));
  const double tlo = mean - slack + 1e-12;
  const double thi = logmax - slack - 1e-9;
  const std::size_t max_distinct =
      std::size_t(budget_env().value_or(4'000'000));
  std::ostringstream csv;
  csv << "t,exact_tail,chernoff_upper,cramer_lower\n";
  for (unsigned i = 0; i < o.grid; ++i) {
    const double t = o.grid == 1 ? tlo
                                 : tlo + (thi - tlo) * double(i) /
                                             double(o.grid - 1);
    const BigInt ex = exact_tail(s, o.n, t, max_distinct);
    const double upper = chernoff_upper(s, o.n, t);
    const double lower = cramer_lower(s, o.n, t + slack, slack);
    csv << fmt(unit(t, o.bits)) << "," << fmt(ex.convert_to<double>()) << ","
        << fmt(upper) << "," << fmt(lower) << "\n";
  }
  emit(csv.str(), o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordering, capacity, and coding calculator for hybrid memories"};
  app.require_subcommand(1);
  Options o;
  int rc = 0;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out, "write the document here instead of stdout");
    cmd->add_flag("--bits", o.bits, "report logarithmic quantities in base 2");
    cmd->add_option("--threads", o.threads, "worker thread cap (currently 1)");
    cmd->add_option("--seed", o.seed, "seed for randomized verbs");
  };

  {
    auto* c = app.add_subcommand("norms", "log p-norms of a shape");
    c->add_option("--shape", o.shape, "comma-separated parts")->required();
    c->add_option("--p", o.p_list, "comma-separated exponents, inf allowed");
    common(c);
    c->callback([&] { rc = run_norms(o); });
  }
  {
    auto* c = app.add_subcommand("embed", "decide exact embeddability");
    c->add_option("--a", o.a, "candidate inner shape")->required();
    c->add_option("--b", o.b, "outer shape")->required();
    c->add_option("--node-budget", o.node_budget, "search node cap");
    common(c);
    c->callback([&] { rc = run_embed(o); });
  }
  {
    auto* c = app.add_subcommand("supermajorize",
                                 "does --b supermajorize --a?");
    c->add_option("--a", o.a, "dominated shape")->required();
    c->add_option("--b", o.b, "dominating shape")->required();
    common(c);
    c->callback([&] { rc = run_supermajorize(o); });
  }

  auto bulk_check_opts = [&](CLI::App* c) {
    c->add_option("--a", o.a, "inner shape")->required();
    c->add_option("--b", o.b, "outer shape")->required();
    c->add_option("--tol", o.tol, "marginality tolerance");
    common(c);
    c->callback([&] { rc = run_bulk_check(o); });
  };
  auto bulk_construct_opts = [&](CLI::App* c) {
    c->add_option("--a", o.a, "inner shape")->required();
    c->add_option("--b", o.b, "outer shape")->required();
    c->add_option("--epsilon", o.epsilon, "rate overhead, rational like 1/4");
    c->add_option("--max-n", o.max_n, "largest tensor power to try");
    common(c);
    c->callback([&] { rc = run_bulk_construct(o); });
  };
  {
    auto* bulk = app.add_subcommand("bulk", "tensor-power ordering");
    bulk->require_subcommand(1);
    bulk_check_opts(bulk->add_subcommand("check", "p-norm domination"));
    bulk_construct_opts(
        bulk->add_subcommand("construct", "verified power embedding"));
    bulk_check_opts(
        app.add_subcommand("bulk-check", "p-norm domination")->group(""));
    bulk_construct_opts(
        app.add_subcommand("bulk-construct", "verified power embedding")
            ->group(""));
  }
  {
    auto* c = app.add_subcommand("capacity", "entropy region boundary as CSV");
    c->add_option("--shape", o.shape, "comma-separated parts")->required();
    c->add_option("--samples", o.samples, "boundary sample count");
    common(c);
    c->callback([&] { rc = run_capacity(o); });
  }
  {
    auto* c = app.add_subcommand("entropy", "entropies of a stored state");
    c->add_option("--state", o.state, "state JSON file")->required();
    c->add_option("--shape", o.shape, "expected shape (cross-check)");
    common(c);
    c->callback([&] { rc = run_entropy(o); });
  }
  {
    auto* c = app.add_subcommand("thermal", "extremal state for an exponent");
    c->add_option("--shape", o.shape, "comma-separated parts")->required();
    c->add_option("--p", o.p_single, "exponent in [1, inf]")->required();
    common(c);
    c->callback([&] { rc = run_thermal(o); });
  }
  {
    auto* c = app.add_subcommand("region-contains",
                                 "is an entropy pair achievable?");
    c->add_option("--shape", o.shape, "comma-separated parts")->required();
    c->add_option("--classical", o.classical, "classical entropy")->required();
    c->add_option("--quantum", o.quantum, "quantum entropy")->required();
    c->add_option("--tol", o.tol, "membership tolerance");
    common(c);
    c->callback([&] { rc = run_region_contains(o); });
  }
  {
    auto* c = app.add_subcommand("region-subset",
                                 "is one entropy region inside another?");
    c->add_option("--a", o.a, "inner shape")->required();
    c->add_option("--b", o.b, "outer shape")->required();
    c->add_option("--samples", o.samples, "inner boundary sample count");
    c->add_option("--tol", o.tol, "membership tolerance");
    common(c);
    c->callback([&] { rc = run_region_subset(o); });
  }
  {
    auto* c = app.add_subcommand("typical",
                                 "typical restriction of a product state");
    c->add_option("--state", o.state, "state JSON file")->required();
    c->add_option("--shape", o.shape, "expected shape (cross-check)");
    c->add_option("--n", o.n, "number of copies")->required();
    c->add_option("--alpha", o.alpha, "frequency window half-width")
        ->required();
    common(c);
    c->callback([&] { rc = run_typical(o); });
  }
  {
    auto* c = app.add_subcommand("bound", "crossing bound on coding fidelity");
    c->add_option("--state", o.state, "state JSON file")->required();
    c->add_option("--shape-a", o.a, "state shape (cross-check)");
    c->add_option("--shape-b", o.b, "target shape")->required();
    c->add_option("--p", o.p_single, "exponent; omit to optimize");
    common(c);
    c->callback([&] { rc = run_bound(o); });
  }
  {
    auto* c = app.add_subcommand("fidelity", "round-trip overlap of a code");
    c->add_option("--channels", o.channels, "channel pair JSON file")
        ->required();
    c->add_option("--state", o.state, "state JSON file")->required();
    common(c);
    c->callback([&] { rc = run_fidelity(o); });
  }
  {
    auto* c = app.add_subcommand(
        "sandwich", "exact tail between analytic bounds, as CSV");
    c->add_option("--shape", o.shape, "comma-separated parts")->required();
    c->add_option("--n", o.n, "tensor power")->required();
    c->add_option("--grid", o.grid, "threshold count");
    common(c);
    c->callback([&] { rc = run_sandwich(o); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const BudgetExceeded& e) {
    std::cerr << "qmem: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qmem: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
