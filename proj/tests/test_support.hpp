#pragma once

#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ucs/demandset.hpp"
#include "ucs/grid.hpp"

namespace ucs_test {

// Connected grid: random spanning tree plus a few chords, modest fleet.
inline ucs::Grid random_connected_grid(std::mt19937_64& rng, int n_buses,
                                       int n_extra_lines, int n_gens) {
  ucs::Grid g;
  for (int i = 0; i < n_buses; ++i) g.buses.push_back("b" + std::to_string(i + 1));

  std::uniform_real_distribution<double> sus(0.5, 2.0);
  std::uniform_real_distribution<double> cap(80.0, 200.0);
  std::uniform_int_distribution<int> any_bus(0, n_buses - 1);

  std::vector<int> order(n_buses);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto add_line = [&](int a, int b) {
    g.lines.push_back({"l" + std::to_string(g.lines.size() + 1), a, b, sus(rng),
                       cap(rng)});
  };
  for (int i = 1; i < n_buses; ++i) {
    std::uniform_int_distribution<int> prev(0, i - 1);
    add_line(order[prev(rng)], order[i]);
  }
  for (int e = 0; e < n_extra_lines; ++e) {
    int a = any_bus(rng), b = any_bus(rng);
    if (a == b) continue;
    bool dup = false;
    for (const auto& ln : g.lines)
      if ((ln.from_bus == a && ln.to_bus == b) || (ln.from_bus == b && ln.to_bus == a))
        dup = true;
    if (!dup) add_line(a, b);
  }

  std::uniform_real_distribution<double> cost(5.0, 50.0);
  std::uniform_real_distribution<double> pmax(40.0, 100.0);
  std::uniform_real_distribution<double> frac(0.0, 0.4);
  for (int k = 0; k < n_gens; ++k) {
    double pm = pmax(rng);
    g.generators.push_back(
        {"g" + std::to_string(k + 1), any_bus(rng), cost(rng), frac(rng) * pm, pm});
  }
  g.slack_bus = 0;
  g.validate();
  return g;
}

// Balanced injection vector (sums to zero).
inline Eigen::VectorXd random_balanced_injections(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q(i) = u(rng);
  q.array() -= q.mean();
  return q;
}

inline std::string data_path(const std::string& name) {
  return std::string(UCS_DATA_DIR) + "/" + name;
}

}  // namespace ucs_test
