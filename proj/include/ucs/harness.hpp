#pragma once

#include <cstdint>
#include <optional>

#include "ucs/screening.hpp"

namespace ucs {

struct InvalidSplit : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IslandingOutage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SplitSpec {
  enum class Kind { RandomFraction, WorstCase } kind = Kind::RandomFraction;
  double test_fraction = 1.0 / 6.0;  // random split
  int n_test = 0;                    // worst-case split
  std::uint64_t seed = 0;
};

struct GeneratorSpec {
  std::string xi_path;  // per-bus allocation factors (CSV keyed by bus id)
  int n_periods = 8640;
  double L_min = 0.0;
  double L_max = 0.0;
  double width = 0.05;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string grid_path;
  std::string history_path;              // used unless generator is set
  std::optional<GeneratorSpec> generator;
  std::string test_history_path;  // explicit test set; overrides split
  SplitSpec split;
  std::vector<std::string> methods;  // subset of {bn, ub, cc, ubcc}
  int n_segments = 1;                // ignored when elbow_max > 0
  int elbow_max = 0;
  double kappa = 1.0;
  double range_margin = 0.0;  // widens the fitted demand range
  MilpOptions solver;
  int n_threads = 0;
  std::string out_dir;
};

struct MethodReport {
  std::string name;
  int retained_count = 0;
  double retained_pct = 0.0;
  int n_infeasible = 0;
  int n_suboptimal = 0;
  int n_exact = 0;
  // reported over all evaluated instances and over suboptimal ones only
  double cost_error_pct_all = 0.0;
  double cost_error_pct_suboptimal = 0.0;
  double screening_time_s = 0.0;
  double reduced_uc_time_s = 0.0;
  double full_uc_time_s = 0.0;
  double burden_pct = 0.0;
};

struct EvaluationReport {
  std::string config_digest;
  int train_size = 0;
  int test_size = 0;
  int skipped_training = 0;  // infeasible training instances
  std::vector<MethodReport> methods;

  std::string to_json_text() const;
  static EvaluationReport from_json_text(const std::string& text);
  static EvaluationReport from_json_file(const std::string& path);
  /// Human-readable aligned table, one column per method.
  std::string to_table_text() const;
};

std::pair<DemandHistory, DemandHistory> random_split(const DemandHistory& history,
                                                     double test_fraction,
                                                     std::uint64_t seed);

/// Test set = the n_test periods with the highest aggregate demand (ties by
/// period index); train = remainder.
std::pair<DemandHistory, DemandHistory> worst_case_split(const DemandHistory& history,
                                                         int n_test);

/// Full pipeline: fit on training solutions, screen per method, solve reduced
/// UC per test period, fix-and-resolve, aggregate. Artifacts are written to
/// config.out_dir when it is set.
EvaluationReport run_pipeline(const ExperimentConfig& config);

struct TopologyOutcome {
  ScreeningResult intersection;
  std::vector<double> removable_fraction;  // base first, then per outage
  std::vector<std::string> variant_names;
};

/// Screens the base grid and every single-line-outage variant (PTDF rebuilt
/// per variant), then intersects the removability verdicts. Sides of an
/// out-of-service line carry no flow and count as removable in that variant.
TopologyOutcome topology_experiment(const Grid& grid,
                                    const std::vector<std::string>& outage_line_ids,
                                    const MethodConfig& base_config,
                                    const MilpOptions& opts = {},
                                    int n_threads = 0);

/// Writes report.json and report.txt under dir.
void emit_report(const EvaluationReport& report, const std::string& dir);

Eigen::VectorXd load_allocation_factors(const std::string& path, const Grid& grid);

}  // namespace ucs
