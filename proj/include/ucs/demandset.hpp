#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ucs {

struct EmptyHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Net demand per bus for one period, plus an optional label.
struct DemandRecord {
  Eigen::VectorXd values;  // MW, one per bus
  std::string label;
};

/// Observed net demands: one row per period, one column per bus.
struct DemandHistory {
  Eigen::MatrixXd values;
  std::vector<std::string> period_labels;

  int num_periods() const { return static_cast<int>(values.rows()); }
  int num_buses() const { return static_cast<int>(values.cols()); }

  DemandRecord record(int t) const {
    return DemandRecord{values.row(t).transpose(),
                        t < static_cast<int>(period_labels.size())
                            ? period_labels[t]
                            : "t" + std::to_string(t + 1)};
  }

  static DemandHistory from_csv_file(const std::string& path);
  static DemandHistory from_csv_text(const std::string& text);
  std::string to_csv_text(const std::vector<std::string>& bus_names = {}) const;
};

struct SingletonSet {
  Eigen::VectorXd demand;
};

struct BoxSet {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Convex combinations of the history rows; weights alpha >= 0 with
/// 1 <= sum alpha <= kappa (kappa relaxes only the upper sum bound).
struct ConvexHullSet {
  Eigen::MatrixXd history;  // period x bus
  double kappa = 1.0;
};

struct DemandSet {
  std::variant<SingletonSet, BoxSet, ConvexHullSet> variant;

  int num_buses() const;
  std::string kind() const;
};

DemandSet singleton_set(const Eigen::VectorXd& d);
DemandSet box_from_history(const DemandHistory& history);
DemandSet hull_from_history(const DemandHistory& history, double kappa = 1.0);

/// Exact for Singleton/Box; for the hull, decided by a feasibility LP over
/// the combination weights.
bool membership(const DemandSet& set, const DemandRecord& d, double tol = 1e-6);

/// Uniform synthetic history: per period, a system level L ~ U(L_range), then
/// per-bus demand ~ U((1-width) L xi_n, (1+width) L xi_n). xi is normalized
/// on input.
DemandHistory generate_history(const Eigen::VectorXd& xi, int n_periods,
                               std::pair<double, double> L_range, double width,
                               std::uint64_t seed);

}  // namespace ucs
