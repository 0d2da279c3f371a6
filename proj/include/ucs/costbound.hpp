#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ucs {

struct TooFewPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateSegment : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutOfFittedRange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One observed UC outcome: aggregate net demand vs optimal cost.
struct CostPoint {
  double demand;  // MW
  double cost;    // currency
};

struct CostSegment {
  double d_min = 0.0;
  double d_max = 0.0;
  double intercept = 0.0;  // rho
  double slope = 0.0;      // nu
};

/// Piecewise-linear upper envelope of cost over aggregate demand. Segments
/// are ordered and contiguous: d_max of one equals d_min of the next.
struct CostBoundModel {
  std::vector<CostSegment> segments;

  double d_min() const { return segments.front().d_min; }
  double d_max() const { return segments.back().d_max; }

  static CostBoundModel constant(double budget, double d_min, double d_max);

  static CostBoundModel from_json_file(const std::string& path);
  static CostBoundModel from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Interior breakpoints minimizing the least-squares segmented-fit error,
/// searched by dynamic programming over the sorted data; endpoints are the
/// data min/max and each segment keeps >= 2 points.
std::vector<double> find_breakpoints(const std::vector<CostPoint>& points,
                                     int n_segments);

/// Per segment, the tightest line above all its points (tau = 1 pinball
/// loss as a slack-minimization LP). Segments are fitted independently.
CostBoundModel fit_quantile_pwl(const std::vector<CostPoint>& points,
                                const std::vector<double>& breakpoints);

/// Budget at aggregate demand D; ties at a shared breakpoint resolve to the
/// left segment. Throws OutOfFittedRange outside [d_min, d_max].
double evaluate_bound(const CostBoundModel& model, double demand);

/// Total tau = 1 pinball loss of the fitted model for each segment count in
/// {1..max_segments}.
std::vector<double> quantile_loss_curve(const std::vector<CostPoint>& points,
                                        int max_segments);

/// Elbow pick on the loss curve: the count with the largest distance to the
/// chord from the first to the last curve point.
int select_segments_elbow(const std::vector<CostPoint>& points, int max_segments);

/// Convenience: breakpoints + quantile fit in one call, with an optional
/// symmetric widening of the fitted demand range.
CostBoundModel fit_cost_bound(const std::vector<CostPoint>& points,
                              int n_segments, double range_margin = 0.0);

}  // namespace ucs
