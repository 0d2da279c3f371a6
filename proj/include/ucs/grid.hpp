#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace ucs {

struct DisconnectedGraph : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularSusceptanceMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Line {
  std::string id;
  int from_bus;  // orientation from->to fixes the flow sign
  int to_bus;
  double susceptance;  // p.u.
  double capacity;     // MW
};

struct Generator {
  std::string id;
  int bus;
  double marginal_cost;  // currency/MWh
  double p_min;          // MW
  double p_max;          // MW
};

/// Single-island network plus fleet. Buses are referenced by index into
/// `buses`; line and generator bus fields hold those indices.
struct Grid {
  std::vector<std::string> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  int slack_bus = 0;

  int num_buses() const { return static_cast<int>(buses.size()); }
  int num_lines() const { return static_cast<int>(lines.size()); }
  int num_generators() const { return static_cast<int>(generators.size()); }

  int bus_index(const std::string& name) const;
  int line_index(const std::string& id) const;

  /// Generators attached to each bus.
  std::vector<std::vector<int>> generators_by_bus() const;

  bool is_connected() const;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  /// Copy with one line removed (outage variant).
  Grid without_line(const std::string& line_id) const;

  static Grid from_json_file(const std::string& path);
  static Grid from_json_text(const std::string& text);
  std::string to_json_text() const;
};

using InjectionVector = Eigen::VectorXd;

struct PtdfMatrix {
  Eigen::MatrixXd values;  // |L| x |N|
  int slack_bus = 0;
};

/// Dense PTDF from the factorized reduced bus-susceptance matrix. Requires a
/// connected grid.
PtdfMatrix build_ptdf(const Grid& grid);

/// f = A q, one entry per line, signed by each line's from->to orientation.
Eigen::VectorXd line_flows(const PtdfMatrix& ptdf, const InjectionVector& q);

}  // namespace ucs
