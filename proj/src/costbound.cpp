#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ucs/costbound.hpp"
#include "ucs/lp.hpp"

namespace ucs {

namespace {

std::vector<CostPoint> sorted_by_demand(std::vector<CostPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const CostPoint& a, const CostPoint& b) {
    return a.demand < b.demand;
  });
  return pts;
}

// Least-squares SSE of one line over points [i, j] via prefix sums.
struct SsePrefix {
  std::vector<double> sx, sy, sxx, sxy, syy;

  explicit SsePrefix(const std::vector<CostPoint>& pts) {
    size_t n = pts.size();
    sx.assign(n + 1, 0.0);
    sy.assign(n + 1, 0.0);
    sxx.assign(n + 1, 0.0);
    sxy.assign(n + 1, 0.0);
    syy.assign(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) {
      double x = pts[i].demand, y = pts[i].cost;
      sx[i + 1] = sx[i] + x;
      sy[i + 1] = sy[i] + y;
      sxx[i + 1] = sxx[i] + x * x;
      sxy[i + 1] = sxy[i] + x * y;
      syy[i + 1] = syy[i] + y * y;
    }
  }

  double sse(int i, int j) const {  // inclusive indices
    double n = j - i + 1;
    double Sx = sx[j + 1] - sx[i], Sy = sy[j + 1] - sy[i];
    double Sxx = sxx[j + 1] - sxx[i], Sxy = sxy[j + 1] - sxy[i];
    double Syy = syy[j + 1] - syy[i];
    double varx = Sxx - Sx * Sx / n;
    if (varx <= 1e-12) return Syy - Sy * Sy / n;  // vertical stack: flat line
    double slope = (Sxy - Sx * Sy / n) / varx;
    double resid = (Syy - Sy * Sy / n) - slope * (Sxy - Sx * Sy / n);
    return std::max(0.0, resid);
  }
};

struct FittedLine {
  double intercept;
  double slope;
};

FittedLine fit_segment_envelope(const std::vector<CostPoint>& pts) {
  bool all_same = true;
  for (const auto& p : pts)
    if (p.demand != pts.front().demand) all_same = false;
  if (all_same)
    throw DegenerateSegment("all demands identical within a segment");

  LinearProgram lp;
  int rho = lp.add_variable(-kInf, kInf, static_cast<double>(pts.size()));
  double sum_d = 0.0;
  for (const auto& p : pts) sum_d += p.demand;
  int nu = lp.add_variable(-kInf, kInf, sum_d);
  for (const auto& p : pts)
    lp.add_row({{rho, 1.0}, {nu, p.demand}}, Relation::Ge, p.cost);
  SolveOutcome out = solve_lp(lp);
  if (out.status != SolveStatus::Optimal)
    throw std::runtime_error("quantile segment fit did not solve");
  return FittedLine{out.primal[rho], out.primal[nu]};
}

}  // namespace

CostBoundModel CostBoundModel::constant(double budget, double d_min, double d_max) {
  CostBoundModel m;
  m.segments.push_back(CostSegment{d_min, d_max, budget, 0.0});
  return m;
}

std::vector<double> find_breakpoints(const std::vector<CostPoint>& points,
                                     int n_segments) {
  if (n_segments < 1) throw std::invalid_argument("n_segments must be >= 1");
  const int n = static_cast<int>(points.size());
  if (n < 2 * n_segments)
    throw TooFewPoints("need >= 2 points per prospective segment");
  if (n_segments == 1) return {};

  auto pts = sorted_by_demand(points);
  SsePrefix pre(pts);
  const double inf = kInf;

  // dp[k][j]: best error covering points 0..j with k+1 segments
  std::vector<std::vector<double>> dp(n_segments, std::vector<double>(n, inf));
  std::vector<std::vector<int>> from(n_segments, std::vector<int>(n, -1));
  for (int j = 1; j < n; ++j) dp[0][j] = pre.sse(0, j);
  for (int k = 1; k < n_segments; ++k) {
    for (int j = 2 * k + 1; j < n; ++j) {
      for (int i = 2 * k; i <= j - 1; ++i) {
        // split between i-1 and i needs distinct demands so the breakpoint
        // separates the two groups by value
        if (!(pts[i - 1].demand < pts[i].demand)) continue;
        if (dp[k - 1][i - 1] == inf) continue;
        double cand = dp[k - 1][i - 1] + pre.sse(i, j);
        if (cand < dp[k][j]) {
          dp[k][j] = cand;
          from[k][j] = i;
        }
      }
    }
  }
  if (dp[n_segments - 1][n - 1] == inf)
    throw TooFewPoints("no valid segmentation with the requested segment count");

  std::vector<double> breakpoints;
  int j = n - 1;
  for (int k = n_segments - 1; k >= 1; --k) {
    int i = from[k][j];
    breakpoints.push_back(0.5 * (pts[i - 1].demand + pts[i].demand));
    j = i - 1;
  }
  std::reverse(breakpoints.begin(), breakpoints.end());
  return breakpoints;
}

CostBoundModel fit_quantile_pwl(const std::vector<CostPoint>& points,
                                const std::vector<double>& breakpoints) {
  if (points.size() < 2) throw TooFewPoints("need >= 2 points");
  auto pts = sorted_by_demand(points);

  std::vector<double> bounds;
  bounds.push_back(pts.front().demand);
  for (double b : breakpoints) bounds.push_back(b);
  bounds.push_back(pts.back().demand);
  for (size_t i = 0; i + 1 < bounds.size(); ++i)
    if (!(bounds[i] < bounds[i + 1]))
      throw std::invalid_argument("breakpoints must be strictly increasing inside the data range");

  CostBoundModel model;
  const int S = static_cast<int>(bounds.size()) - 1;
  for (int s = 0; s < S; ++s) {
    std::vector<CostPoint> seg;
    for (const auto& p : pts) {
      // ties at a shared breakpoint belong to the left segment
      bool in = s == 0 ? p.demand <= bounds[s + 1]
                       : p.demand > bounds[s] && p.demand <= bounds[s + 1];
      if (in) seg.push_back(p);
    }
    if (seg.size() < 2) throw TooFewPoints("segment holds fewer than 2 points");
    FittedLine line = fit_segment_envelope(seg);
    model.segments.push_back(
        CostSegment{bounds[s], bounds[s + 1], line.intercept, line.slope});
  }
  return model;
}

double evaluate_bound(const CostBoundModel& model, double demand) {
  if (model.segments.empty()) throw std::invalid_argument("empty cost-bound model");
  if (demand < model.d_min() || demand > model.d_max())
    throw OutOfFittedRange("aggregate demand outside fitted range");
  for (const auto& s : model.segments)
    if (demand <= s.d_max) return s.intercept + s.slope * demand;
  const auto& last = model.segments.back();
  return last.intercept + last.slope * demand;
}

std::vector<double> quantile_loss_curve(const std::vector<CostPoint>& points,
                                        int max_segments) {
  if (max_segments < 1) throw std::invalid_argument("max_segments must be >= 1");
  std::vector<double> losses;
  for (int n = 1; n <= max_segments; ++n) {
    auto model = fit_quantile_pwl(points, find_breakpoints(points, n));
    double loss = 0.0;
    for (const auto& p : points) loss += evaluate_bound(model, p.demand) - p.cost;
    losses.push_back(loss);
  }
  return losses;
}

int select_segments_elbow(const std::vector<CostPoint>& points, int max_segments) {
  auto curve = quantile_loss_curve(points, max_segments);
  const int m = static_cast<int>(curve.size());
  if (m == 1 || curve.front() <= curve.back() + 1e-12) return 1;
  // farthest point from the chord between the curve's endpoints
  double x0 = 1, y0 = curve.front(), x1 = m, y1 = curve.back();
  double dx = x1 - x0, dy = y1 - y0;
  double norm = std::sqrt(dx * dx + dy * dy);
  int best = 1;
  double best_dist = -1.0;
  for (int i = 0; i < m; ++i) {
    double px = i + 1 - x0, py = curve[i] - y0;
    double dist = std::abs(px * dy - py * dx) / norm;
    if (dist > best_dist) {
      best_dist = dist;
      best = i + 1;
    }
  }
  return best;
}

CostBoundModel fit_cost_bound(const std::vector<CostPoint>& points,
                              int n_segments, double range_margin) {
  auto model = fit_quantile_pwl(points, find_breakpoints(points, n_segments));
  if (range_margin > 0.0) {
    model.segments.front().d_min -= range_margin;
    model.segments.back().d_max += range_margin;
  }
  return model;
}

CostBoundModel CostBoundModel::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CostBoundModel m;
  for (const auto& js : j.at("segments"))
    m.segments.push_back(CostSegment{js.at("d_min").get<double>(),
                                     js.at("d_max").get<double>(),
                                     js.at("intercept").get<double>(),
                                     js.at("slope").get<double>()});
  if (m.segments.empty()) throw std::runtime_error("cost-bound file has no segments");
  return m;
}

CostBoundModel CostBoundModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost-bound file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string CostBoundModel::to_json_text() const {
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : segments)
    j["segments"].push_back({{"d_min", s.d_min},
                             {"d_max", s.d_max},
                             {"intercept", s.intercept},
                             {"slope", s.slope}});
  return j.dump(2);
}

}  // namespace ucs
