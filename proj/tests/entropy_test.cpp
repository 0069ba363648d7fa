#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "qmem/entropy.hpp"
#include "qmem/errors.hpp"
#include "qmem/largedev.hpp"
#include "test_support.hpp"

using namespace qmem;
using qmem::testsupport::random_shape;
using qmem::testsupport::uniform01;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

Shape sh(const char* text) { return Shape::parse(text); }

DiagonalState random_state(const Shape& s, std::mt19937_64& rng) {
  std::vector<std::vector<double>> blocks;
  double total = 0.0;
  for (const auto& part : s.expanded()) {
    std::vector<double> b(part.convert_to<std::size_t>());
    for (double& x : b) {
      x = uniform01(rng);
      total += x;
    }
    blocks.push_back(std::move(b));
  }
  for (auto& b : blocks)
    for (double& x : b) x /= total;
  return make_state(std::move(blocks));
}

}  // namespace

TEST_CASE("state validation and normalization") {
  CHECK_THROWS_AS(make_state({}), std::invalid_argument);
  CHECK_THROWS_AS(make_state({{0.5, 0.5}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(make_state({{1.1, -0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(make_state({{std::nan("")}}), std::invalid_argument);
  CHECK_THROWS_AS(make_state({{0.7}}), std::invalid_argument);
  CHECK_THROWS_AS(make_state({{1.0}}, -1.0), std::invalid_argument);

  // A total within tolerance is renormalized to exactly 1.
  const DiagonalState w = make_state({{0.5 + 3e-10}, {0.25, 0.25}});
  double total = 0.0;
  for (const auto& b : w.blocks)
    for (double x : b) total += x;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w.shape() == sh("2,1"));
  CHECK(w.block_probs()[0] == doctest::Approx(0.5).epsilon(1e-9));

  // Tiny negatives inside tolerance are clamped to zero.
  const DiagonalState z = make_state({{1.0, -1e-13}});
  CHECK(z.blocks[0][1] == 0.0);
}

TEST_CASE("entropies of pinned states") {
  const DiagonalState w = make_state({{0.5}, {0.25, 0.25}});
  CHECK(classical_entropy(w) == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(quantum_entropy(w) == doctest::Approx(0.5 * kLog2).epsilon(1e-12));

  const DiagonalState pure = make_state({{1.0}});
  CHECK(classical_entropy(pure) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(quantum_entropy(pure) == doctest::Approx(0.0).epsilon(1e-15));

  const DiagonalState qubit = make_state({{0.5, 0.5}});
  CHECK(classical_entropy(qubit) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(quantum_entropy(qubit) == doctest::Approx(kLog2).epsilon(1e-12));
}

TEST_CASE("thermal states at pinned parameters") {
  SUBCASE("hybrid trit at p = 1 is maximally mixed") {
    const DiagonalState w = thermal_state(sh("2,1"), 1.0);
    REQUIRE(w.blocks.size() == 2);
    for (const auto& b : w.blocks)
      for (double x : b) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(classical_entropy(w) ==
          doctest::Approx(kLog3 - 2.0 / 3.0 * kLog2).epsilon(1e-12));
    CHECK(quantum_entropy(w) == doctest::Approx(2.0 / 3.0 * kLog2).epsilon(1e-12));
  }
  SUBCASE("qubit plus two bits at p = 1") {
    const DiagonalState w = thermal_state(sh("2,1,1"), 1.0);
    CHECK(classical_entropy(w) == doctest::Approx(1.5 * kLog2).epsilon(1e-12));
    CHECK(quantum_entropy(w) == doctest::Approx(0.5 * kLog2).epsilon(1e-12));
  }
  SUBCASE("p = inf concentrates uniformly on the largest blocks") {
    const DiagonalState w = thermal_state(sh("3,3,2"), kInf);
    REQUIRE(w.blocks.size() == 3);
    const auto r = w.block_probs();
    CHECK(r[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r[2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(classical_entropy(w) == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(quantum_entropy(w) == doctest::Approx(kLog3).epsilon(1e-12));
  }
  SUBCASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(thermal_state(sh("2,1"), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(thermal_state(sh("2,1"), std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(capacity_point(sh("2,1"), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(thermal_state(Shape(), 1.0), std::invalid_argument);
  }
  SUBCASE("oversized shapes are budget-guarded") {
    const Shape big = tensor_power(sh("2,1"), 40);
    CHECK_THROWS_AS(thermal_state(big, 1.0), BudgetExceeded);
  }
}

TEST_CASE("materialized thermal entropies match the closed form") {
  std::mt19937_64 rng(501);
  const double ps[] = {1.0, 1.5, 2.0, 3.0, 10.0, kInf};
  for (int trial = 0; trial < 20; ++trial) {
    const Shape s = random_shape(rng, 5, 6);
    for (double p : ps) {
      const DiagonalState w = thermal_state(s, p);
      const CapacityPoint c = capacity_point(s, p);
      CHECK(classical_entropy(w) == doctest::Approx(c.classical).epsilon(1e-10));
      CHECK(quantum_entropy(w) == doctest::Approx(c.quantum).epsilon(1e-10));
    }
  }
}

TEST_CASE("every state obeys the norm constraints") {
  std::mt19937_64 rng(502);
  const double ps[] = {1.0, 2.0, 3.0, 10.0};
  for (int trial = 0; trial < 40; ++trial) {
    const Shape s = random_shape(rng, 5, 5);
    const DiagonalState w = random_state(s, rng);
    const double h = classical_entropy(w);
    const double q = quantum_entropy(w);
    for (double p : ps) CHECK(h / p + q <= log_p_norm(s, p) + 1e-10);
    CHECK(q <= log_big(s.max_part()) + 1e-10);
  }
}

TEST_CASE("capacity points sit on their tangent constraint") {
  const CapacityPoint c = capacity_point(sh("2,1,1"), 3.0);
  CHECK(c.classical + 3.0 * c.quantum == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  const CapacityPoint top = capacity_point(sh("3,3,2"), kInf);
  CHECK(top.classical == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(top.quantum == doctest::Approx(kLog3).epsilon(1e-12));

  // Classical coordinate falls and quantum coordinate rises with p.
  const Shape s = sh("3,2,1,1");
  CapacityPoint prev = capacity_point(s, 1.0);
  for (double p : {1.3, 1.8, 2.5, 4.0, 7.0, 12.0, 20.0}) {
    const CapacityPoint cur = capacity_point(s, p);
    CHECK(cur.classical <= prev.classical + 1e-12);
    CHECK(cur.quantum >= prev.quantum - 1e-12);
    prev = cur;
  }
}

TEST_CASE("region boundary polylines") {
  SUBCASE("qubit plus two bits") {
    const auto pts = region_boundary(sh("2,1,1"), 64);
    REQUIRE(pts.size() >= 3);
    CHECK(pts.front().classical == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pts.front().quantum == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(pts.back().classical == doctest::Approx(2.0 * kLog2).epsilon(1e-12));
    CHECK(pts.back().quantum == doctest::Approx(0.0).epsilon(1e-12));
    // The thermal corner at p = 1 is a vertex of the polyline.
    bool has_corner = false;
    for (const auto& pt : pts) {
      const bool near = std::abs(pt.classical - 1.5 * kLog2) < 1e-9 &&
                        std::abs(pt.quantum - 0.5 * kLog2) < 1e-9;
      has_corner = has_corner || near;
    }
    CHECK(has_corner);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      CHECK(pts[i].classical >= pts[i - 1].classical - 1e-9);
      CHECK(pts[i].quantum <= pts[i - 1].quantum + 1e-9);
    }
    for (const auto& pt : pts) {
      const ContainsResult r = region_contains(sh("2,1,1"), pt.classical, pt.quantum);
      CHECK(r.contained);
      CHECK(std::abs(r.margin) <= 1e-7);
    }
  }
  SUBCASE("classical shapes are flat") {
    const auto pts = region_boundary(sh("1,1,1"), 16);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].classical == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pts[0].quantum == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pts[1].classical == doctest::Approx(kLog3).epsilon(1e-12));
    CHECK(pts[1].quantum == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("a lone qubit is a triangle edge") {
    const auto pts = region_boundary(sh("2"), 16);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].classical == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pts[0].quantum == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(pts[1].classical == doctest::Approx(kLog2).epsilon(1e-12));
    CHECK(pts[1].quantum == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("invalid sample counts are rejected") {
    CHECK_THROWS_AS(region_boundary(sh("2,1"), 1), std::invalid_argument);
  }
}

TEST_CASE("region membership with pinned margins") {
  SUBCASE("classical shapes admit no in-block entropy") {
    const ContainsResult r = region_contains(sh("1,1,1"), 0.0, kLog2);
    CHECK(!r.contained);
    CHECK(r.margin == doctest::Approx(-kLog2).epsilon(1e-9));
  }
  SUBCASE("interior point of the qubit-plus-two-bits region") {
    const ContainsResult r = region_contains(sh("2,1,1"), 0.5, 0.3);
    CHECK(r.contained);
    CHECK(r.margin > 0.294);
    CHECK(r.margin < 0.299);
  }
  SUBCASE("negative coordinates fall outside") {
    const ContainsResult r = region_contains(sh("2,1,1"), -0.1, 0.1);
    CHECK(!r.contained);
    CHECK(r.margin == doctest::Approx(-0.1).epsilon(1e-12));
  }
  SUBCASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(region_contains(Shape(), 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(region_contains(sh("2,1"), std::nan(""), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(region_contains(sh("2,1"), 0.0, kInf), std::invalid_argument);
    CHECK_THROWS_AS(region_contains(sh("2,1"), 0.0, 0.0, -1.0), std::invalid_argument);
  }
}

TEST_CASE("region subset verdicts") {
  CHECK(region_subset(sh("1,1,1"), sh("2,1")).subset);
  CHECK(!region_subset(sh("2,1"), sh("1,1,1")).subset);
  CHECK(region_subset(sh("2,1"), sh("2,1,1")).subset);
  CHECK(!region_subset(sh("2,1,1"), sh("2,1")).subset);
  // The failing direction reports how far outside the boundary lands.
  CHECK(region_subset(sh("2,1"), sh("1,1,1")).margin ==
        doctest::Approx(-kLog2).epsilon(1e-9));
}

TEST_CASE("realizing pinned region points") {
  SUBCASE("uniform qubit carries its classical rate in-block") {
    const Realization r = realize_point(sh("2"), kLog2, 0.0);
    CHECK(r.classical_via_quantum == doctest::Approx(kLog2).epsilon(1e-10));
    REQUIRE(r.state.blocks.size() == 1);
    CHECK(r.state.blocks[0][0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.state.blocks[0][1] == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("the p = 1 corner is the maximally mixed state") {
    const Realization r = realize_point(sh("2,1,1"), 1.5 * kLog2, 0.5 * kLog2);
    CHECK(r.classical_via_quantum == doctest::Approx(0.0).epsilon(1e-10));
    for (const auto& b : r.state.blocks)
      for (double x : b) CHECK(x == doctest::Approx(0.25).epsilon(1e-9));
  }
  SUBCASE("the all-classical corner of the hybrid trit") {
    const Realization r = realize_point(sh("2,1"), kLog3, 0.0);
    CHECK(r.classical_via_quantum == doctest::Approx(2.0 / 3.0 * kLog2).epsilon(1e-10));
    CHECK(classical_entropy(r.state) ==
          doctest::Approx(kLog3 - 2.0 / 3.0 * kLog2).epsilon(1e-10));
    CHECK(quantum_entropy(r.state) == doctest::Approx(2.0 / 3.0 * kLog2).epsilon(1e-10));
  }
  SUBCASE("points outside the region are rejected") {
    CHECK_THROWS_AS(realize_point(sh("2,1"), kLog3, 0.1), std::domain_error);
    CHECK_THROWS_AS(realize_point(sh("1,1"), 0.2, 0.05), std::domain_error);
  }
}

TEST_CASE("realizations hit scaled boundary targets exactly") {
  const char* shapes[] = {"2,1", "3,2,1", "2,2,1,1", "4,1", "3,3,2"};
  for (const char* text : shapes) {
    const Shape s = sh(text);
    for (const auto& pt : region_boundary(s, 40)) {
      for (double scale : {0.25, 0.7, 0.95}) {
        const double h = scale * pt.classical;
        const double q = scale * pt.quantum;
        const Realization r = realize_point(s, h, q);
        CHECK(r.classical_via_quantum >= 0.0);
        CHECK(r.state.shape() == s);
        CHECK(classical_entropy(r.state) + r.classical_via_quantum ==
              doctest::Approx(h).epsilon(1e-8));
        CHECK(quantum_entropy(r.state) - r.classical_via_quantum ==
              doctest::Approx(q).epsilon(1e-8));
      }
    }
  }
}
