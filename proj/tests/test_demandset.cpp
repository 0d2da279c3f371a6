#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "ucs/demandset.hpp"

using namespace ucs;

namespace {

DemandHistory five_node_history() {
  return DemandHistory::from_csv_file(ucs_test::data_path("five_node_history.csv"));
}

Eigen::VectorXd d5(double a, double b, double c, double d, double e) {
  Eigen::VectorXd v(5);
  v << a, b, c, d, e;
  return v;
}

}  // namespace

TEST_CASE("csv history parses labels and values") {
  auto h = five_node_history();
  REQUIRE(h.num_periods() == 3);
  REQUIRE(h.num_buses() == 5);
  CHECK(h.record(0).label == "t1");
  CHECK(h.record(0).values(3) == doctest::Approx(55.0));
  CHECK(h.record(1).values(3) == doctest::Approx(75.0));
  CHECK(h.record(2).values(4) == doctest::Approx(69.0));
  CHECK(h.record(2).values(0) == doctest::Approx(0.0));
}

TEST_CASE("csv round-trip preserves the table") {
  auto h = five_node_history();
  auto again = DemandHistory::from_csv_text(
      h.to_csv_text({"n1", "n2", "n3", "n4", "n5"}));
  REQUIRE(again.num_periods() == h.num_periods());
  REQUIRE(again.num_buses() == h.num_buses());
  for (int t = 0; t < h.num_periods(); ++t) {
    CHECK(again.record(t).label == h.record(t).label);
    for (int b = 0; b < h.num_buses(); ++b)
      CHECK(again.values(t, b) == doctest::Approx(h.values(t, b)));
  }
}

TEST_CASE("box from observed history spans the per-bus extremes") {
  auto box = box_from_history(five_node_history());
  const auto& b = std::get<BoxSet>(box.variant);
  CHECK(b.lower(3) == doctest::Approx(0.0));
  CHECK(b.upper(3) == doctest::Approx(75.0));
  CHECK(b.lower(4) == doctest::Approx(0.0));
  CHECK(b.upper(4) == doctest::Approx(69.0));
  CHECK(box.kind() == "box");
}

TEST_CASE("box membership") {
  auto box = box_from_history(five_node_history());
  CHECK(membership(box, {d5(0, 0, 0, 58, 13.8), ""}));
  CHECK(membership(box, {d5(0, 0, 0, 75, 69), ""}));  // box corner, unobserved
  CHECK(!membership(box, {d5(0, 0, 0, 76, 0), ""}));
  CHECK(!membership(box, {d5(0, 0, 0, 0, -1), ""}));
}

TEST_CASE("hull membership distinguishes interior combinations from corners") {
  auto hull = hull_from_history(five_node_history(), 1.0);
  CHECK(hull.kind() == "hull");
  // 0.1*(55) + 0.7*(75) at bus 4 and 0.2*(69) at bus 5
  CHECK(membership(hull, {d5(0, 0, 0, 58, 13.8), ""}));
  for (int t = 0; t < 3; ++t)
    CHECK(membership(hull, five_node_history().record(t)));
  // in the box but not in the hull
  CHECK(!membership(hull, {d5(0, 0, 0, 75, 69), ""}));
  CHECK(!membership(hull, {d5(0, 0, 0, 0, 0), ""}));
}

TEST_CASE("hull is contained in the box") {
  std::mt19937_64 rng(77);
  Eigen::VectorXd xi(4);
  xi << 0.4, 0.3, 0.2, 0.1;
  auto h = generate_history(xi, 30, {100.0, 200.0}, 0.1, 5);
  auto hull = hull_from_history(h, 1.0);
  auto box = box_from_history(h);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd alpha(h.num_periods());
    for (int t = 0; t < h.num_periods(); ++t) alpha(t) = w(rng);
    alpha /= alpha.sum();
    Eigen::VectorXd d = h.values.transpose() * alpha;
    CHECK(membership(hull, {d, ""}, 1e-5));
    CHECK(membership(box, {d, ""}, 1e-5));
  }
}

TEST_CASE("kappa only widens the hull") {
  auto h = five_node_history();
  auto tight = hull_from_history(h, 1.0);
  auto loose = hull_from_history(h, 1.5);
  // scaled-up combination: sum of weights 1.3
  auto d = DemandRecord{d5(0, 0, 0, 1.3 * 75, 0), ""};
  CHECK(!membership(tight, d));
  CHECK(membership(loose, d));
  // everything in the tight hull stays in the loose one
  CHECK(membership(loose, {d5(0, 0, 0, 58, 13.8), ""}));
}

TEST_CASE("singleton membership is exact") {
  auto s = singleton_set(d5(1, 2, 3, 4, 5));
  CHECK(s.kind() == "singleton");
  CHECK(membership(s, {d5(1, 2, 3, 4, 5), ""}));
  CHECK(!membership(s, {d5(1, 2, 3, 4, 5.1), ""}));
}

TEST_CASE("generated history respects the system-level range and width") {
  Eigen::VectorXd xi(3);
  xi << 2.0, 1.0, 1.0;  // normalized internally to (0.5, 0.25, 0.25)
  auto h = generate_history(xi, 400, {1000.0, 1200.0}, 0.05, 42);
  REQUIRE(h.num_periods() == 400);
  REQUIRE(h.num_buses() == 3);
  for (int t = 0; t < h.num_periods(); ++t) {
    double agg = h.values.row(t).sum();
    CHECK(agg >= 0.95 * 1000.0 - 1e-9);
    CHECK(agg <= 1.05 * 1200.0 + 1e-9);
    // per-bus value stays inside the widened allocation band for some L in range
    CHECK(h.values(t, 0) >= 0.95 * 0.5 * 1000.0 - 1e-9);
    CHECK(h.values(t, 0) <= 1.05 * 0.5 * 1200.0 + 1e-9);
  }
}

TEST_CASE("zero width pins the allocation exactly") {
  Eigen::VectorXd xi(2);
  xi << 0.75, 0.25;
  auto h = generate_history(xi, 50, {100.0, 100.0}, 0.0, 7);
  for (int t = 0; t < h.num_periods(); ++t) {
    CHECK(h.values(t, 0) == doctest::Approx(75.0));
    CHECK(h.values(t, 1) == doctest::Approx(25.0));
  }
}

TEST_CASE("generation is deterministic in the seed") {
  Eigen::VectorXd xi(3);
  xi << 0.5, 0.3, 0.2;
  auto a = generate_history(xi, 20, {10.0, 20.0}, 0.1, 123);
  auto b = generate_history(xi, 20, {10.0, 20.0}, 0.1, 123);
  auto c = generate_history(xi, 20, {10.0, 20.0}, 0.1, 124);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  DemandHistory empty;
  empty.values.resize(0, 3);
  CHECK_THROWS_AS(box_from_history(empty), EmptyHistory);
  CHECK_THROWS_AS(hull_from_history(empty), EmptyHistory);
  Eigen::VectorXd xi(2);
  xi << 0.5, 0.5;
  CHECK_THROWS_AS(generate_history(xi, 10, {20.0, 10.0}, 0.05, 1), InvalidRange);
  CHECK_THROWS_AS(generate_history(xi, 10, {10.0, 20.0}, 1.5, 1), InvalidRange);
  CHECK_THROWS_AS(hull_from_history(five_node_history(), 0.5), std::invalid_argument);
}
