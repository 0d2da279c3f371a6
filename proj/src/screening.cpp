#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ucs/screening.hpp"

namespace ucs {

namespace {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    default: return "unbounded";
  }
}

SolveStatus status_from_name(const std::string& s) {
  if (s == "optimal") return SolveStatus::Optimal;
  if (s == "infeasible") return SolveStatus::Infeasible;
  return SolveStatus::Unbounded;
}

}  // namespace

std::string MethodConfig::digest() const {
  std::ostringstream os;
  os.precision(17);
  os << tag << "|other=" << enforce_other_lines << "|set=" << demand_set.kind();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SingletonSet>) {
          for (double v : s.demand) os << "," << v;
        } else if constexpr (std::is_same_v<T, BoxSet>) {
          for (int i = 0; i < s.lower.size(); ++i)
            os << "," << s.lower[i] << ":" << s.upper[i];
        } else {
          os << ",k=" << s.kappa << ",T=" << s.history.rows();
          for (int t = 0; t < s.history.rows(); ++t)
            for (int n = 0; n < s.history.cols(); ++n) os << "," << s.history(t, n);
        }
      },
      demand_set.variant);
  if (cost_bound) {
    os << "|bound=";
    for (const auto& seg : cost_bound->segments)
      os << seg.d_min << ":" << seg.d_max << ":" << seg.intercept << ":"
         << seg.slope << ";";
  }
  return fnv1a_hex(os.str());
}

MethodConfig make_method(const std::string& tag, const DemandHistory& training,
                         const std::optional<CostBoundModel>& bound,
                         double kappa) {
  MethodConfig cfg;
  cfg.tag = tag;
  if (tag == "bn") {
    cfg.demand_set = box_from_history(training);
  } else if (tag == "ub") {
    cfg.demand_set = box_from_history(training);
    if (!bound) throw ConfigMismatch("ub requires a cost bound");
    cfg.cost_bound = bound;
  } else if (tag == "cc") {
    cfg.demand_set = hull_from_history(training, kappa);
  } else if (tag == "ubcc") {
    cfg.demand_set = hull_from_history(training, kappa);
    if (!bound) throw ConfigMismatch("ubcc requires a cost bound");
    cfg.cost_bound = bound;
  } else {
    throw ConfigMismatch("unknown method tag: " + tag);
  }
  return cfg;
}

LinearProgram build_bounding_model(const Grid& grid, const PtdfMatrix& ptdf,
                                   int line, Side side,
                                   const MethodConfig& config) {
  const int G = grid.num_generators();
  const int N = grid.num_buses();
  const int L = grid.num_lines();
  if (line < 0 || line >= L) throw ConfigMismatch("line index out of range");
  if (config.demand_set.num_buses() != N)
    throw ConfigMismatch("demand set does not match grid bus count");

  LinearProgram lp;
  lp.sense = side == Side::Upper ? Sense::Maximize : Sense::Minimize;

  std::vector<int> u(G), p(G), q(N), d(N);
  for (int g = 0; g < G; ++g) u[g] = lp.add_variable(0.0, 1.0, 0.0);
  for (int g = 0; g < G; ++g)
    p[g] = lp.add_variable(0.0, grid.generators[g].p_max, 0.0);
  for (int n = 0; n < N; ++n) {
    // objective: flow through the screened line
    q[n] = lp.add_variable(-kInf, kInf, ptdf.values(line, n));
  }
  if (const auto* s = std::get_if<SingletonSet>(&config.demand_set.variant)) {
    for (int n = 0; n < N; ++n)
      d[n] = lp.add_variable(s->demand[n], s->demand[n], 0.0);
  } else if (const auto* s = std::get_if<BoxSet>(&config.demand_set.variant)) {
    for (int n = 0; n < N; ++n)
      d[n] = lp.add_variable(s->lower[n], s->upper[n], 0.0);
  } else {
    const auto& hull = std::get<ConvexHullSet>(config.demand_set.variant);
    for (int n = 0; n < N; ++n) d[n] = lp.add_variable(-kInf, kInf, 0.0);
    const int T = static_cast<int>(hull.history.rows());
    std::vector<int> alpha(T);
    for (int t = 0; t < T; ++t) alpha[t] = lp.add_variable(0.0, kInf, 0.0);
    for (int n = 0; n < N; ++n) {
      std::vector<std::pair<int, double>> row{{d[n], 1.0}};
      for (int t = 0; t < T; ++t)
        if (hull.history(t, n) != 0.0)
          row.emplace_back(alpha[t], -hull.history(t, n));
      lp.add_row(std::move(row), Relation::Eq, 0.0, "hull_" + grid.buses[n]);
    }
    std::vector<std::pair<int, double>> ones;
    for (int t = 0; t < T; ++t) ones.emplace_back(alpha[t], 1.0);
    if (hull.kappa == 1.0) {
      lp.add_row(ones, Relation::Eq, 1.0, "hull_sum");
    } else {
      lp.add_row(ones, Relation::Ge, 1.0, "hull_sum_lo");
      lp.add_row(ones, Relation::Le, hull.kappa, "hull_sum_hi");
    }
  }

  auto by_bus = grid.generators_by_bus();
  for (int n = 0; n < N; ++n) {
    std::vector<std::pair<int, double>> row{{q[n], 1.0}, {d[n], 1.0}};
    for (int g : by_bus[n]) row.emplace_back(p[g], -1.0);
    lp.add_row(std::move(row), Relation::Eq, 0.0, "inject_" + grid.buses[n]);
  }
  {
    std::vector<std::pair<int, double>> row;
    for (int n = 0; n < N; ++n) row.emplace_back(q[n], 1.0);
    lp.add_row(std::move(row), Relation::Eq, 0.0, "balance");
  }
  for (int g = 0; g < G; ++g) {
    const auto& gen = grid.generators[g];
    lp.add_row({{p[g], 1.0}, {u[g], -gen.p_max}}, Relation::Le, 0.0, "cap_" + gen.id);
    lp.add_row({{p[g], 1.0}, {u[g], -gen.p_min}}, Relation::Ge, 0.0, "floor_" + gen.id);
  }
  if (config.enforce_other_lines) {
    for (int l = 0; l < L; ++l) {
      if (l == line) continue;
      std::vector<std::pair<int, double>> row;
      for (int n = 0; n < N; ++n) {
        double a = ptdf.values(l, n);
        if (a != 0.0) row.emplace_back(q[n], a);
      }
      lp.add_row(row, Relation::Le, grid.lines[l].capacity,
                 "flow_" + grid.lines[l].id + "_up");
      lp.add_row(std::move(row), Relation::Ge, -grid.lines[l].capacity,
                 "flow_" + grid.lines[l].id + "_lo");
    }
  }

  if (config.cost_bound) {
    auto segs = config.cost_bound->segments;
    const int S = static_cast<int>(segs.size());
    // Extrapolate the outer segments over the demand set's aggregate range:
    // the budget line stays active for any reachable D, and the y/z coupling
    // below keeps a valid exact linearization (finite segment bounds).
    double set_dlo = 0.0, set_dhi = 0.0;
    if (const auto* s = std::get_if<SingletonSet>(&config.demand_set.variant)) {
      set_dlo = set_dhi = s->demand.sum();
    } else if (const auto* s = std::get_if<BoxSet>(&config.demand_set.variant)) {
      set_dlo = s->lower.sum();
      set_dhi = s->upper.sum();
    } else {
      const auto& hull = std::get<ConvexHullSet>(config.demand_set.variant);
      Eigen::VectorXd sums = hull.history.rowwise().sum();
      double lo = sums.minCoeff(), hi = sums.maxCoeff();
      set_dlo = std::min(lo, hull.kappa * lo);
      set_dhi = std::max(hi, hull.kappa * hi);
    }
    segs.front().d_min = std::min(segs.front().d_min, set_dlo);
    segs.back().d_max = std::max(segs.back().d_max, set_dhi);
    int D = lp.add_variable(-kInf, kInf, 0.0);
    std::vector<int> y(S), z(S);
    for (int s = 0; s < S; ++s) {
      // a single segment collapses to a pure LP with y pinned to 1
      y[s] = S == 1 ? lp.add_variable(1.0, 1.0, 0.0)
                    : lp.add_variable(0.0, 1.0, 0.0, true);
      z[s] = lp.add_variable(-kInf, kInf, 0.0);
    }
    // budget: sum c_g p_g <= sum_s (rho_s y_s + nu_s z_s), z_s = y_s D
    std::vector<std::pair<int, double>> budget;
    for (int g = 0; g < G; ++g)
      budget.emplace_back(p[g], grid.generators[g].marginal_cost);
    for (int s = 0; s < S; ++s) {
      budget.emplace_back(y[s], -segs[s].intercept);
      budget.emplace_back(z[s], -segs[s].slope);
    }
    lp.add_row(std::move(budget), Relation::Le, 0.0, "cost_budget");
    for (int s = 0; s < S; ++s) {
      lp.add_row({{z[s], 1.0}, {y[s], -segs[s].d_max}}, Relation::Le, 0.0);
      lp.add_row({{z[s], 1.0}, {y[s], -segs[s].d_min}}, Relation::Ge, 0.0);
    }
    std::vector<std::pair<int, double>> zsum{{D, -1.0}};
    for (int s = 0; s < S; ++s) zsum.emplace_back(z[s], 1.0);
    lp.add_row(std::move(zsum), Relation::Eq, 0.0, "segment_demand");
    std::vector<std::pair<int, double>> dsum{{D, 1.0}};
    for (int n = 0; n < N; ++n) dsum.emplace_back(d[n], -1.0);
    lp.add_row(std::move(dsum), Relation::Eq, 0.0, "aggregate_demand");
    std::vector<std::pair<int, double>> ysum;
    for (int s = 0; s < S; ++s) ysum.emplace_back(y[s], 1.0);
    lp.add_row(std::move(ysum), Relation::Eq, 1.0, "one_segment");
  }

  return lp;
}

ScreeningBound screen_line(const Grid& grid, const PtdfMatrix& ptdf, int line,
                           Side side, const MethodConfig& config,
                           const MilpOptions& opts) {
  LinearProgram lp = build_bounding_model(grid, ptdf, line, side, config);
  SolveOutcome out = solve_milp(lp, opts);

  ScreeningBound b;
  b.line = line;
  b.side = side;
  b.capacity = grid.lines[line].capacity;
  b.status = out.status;
  if (out.status == SolveStatus::Optimal) {
    b.extreme_flow = out.objective;
    b.removable = side == Side::Upper
                      ? out.objective < b.capacity - kRemovalTolMw
                      : out.objective > -b.capacity + kRemovalTolMw;
  } else {
    // unbounded or infeasible relaxation: keep the side, flagged by status
    b.extreme_flow = side == Side::Upper ? kInf : -kInf;
    b.removable = false;
  }
  return b;
}

ScreeningResult screen_all(const Grid& grid, const PtdfMatrix& ptdf,
                           const MethodConfig& config, const MilpOptions& opts,
                           int n_threads) {
  const int L = grid.num_lines();
  ScreeningResult res;
  res.method = config.tag;
  res.config_digest = config.digest();
  res.timestamp = iso_timestamp();
  res.sides.resize(L);

  if (n_threads <= 0)
    n_threads = std::min(8u, std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, 2 * L);

  std::atomic<int> next{0};
  std::vector<std::string> errors(2 * L);
  auto worker = [&] {
    for (;;) {
      int task = next.fetch_add(1);
      if (task >= 2 * L) return;
      int line = task / 2;
      Side side = task % 2 == 0 ? Side::Lower : Side::Upper;
      try {
        res.sides[line][task % 2] = screen_line(grid, ptdf, line, side, config, opts);
      } catch (const std::exception& e) {
        errors[task] = e.what();
        ScreeningBound b;
        b.line = line;
        b.side = side;
        b.capacity = grid.lines[line].capacity;
        b.extreme_flow = side == Side::Upper ? kInf : -kInf;
        b.removable = false;
        b.status = SolveStatus::Unbounded;
        res.sides[line][task % 2] = b;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string joined;
  for (const auto& e : errors)
    if (!e.empty()) joined += e + "; ";
  if (!joined.empty())
    throw std::runtime_error("screening failures (partial results kept retained): " + joined);
  return res;
}

int ScreeningResult::removable_count() const {
  int c = 0;
  for (const auto& s : sides) c += (s[0].removable ? 1 : 0) + (s[1].removable ? 1 : 0);
  return c;
}

double ScreeningResult::removable_fraction() const {
  return sides.empty() ? 0.0 : static_cast<double>(removable_count()) / (2.0 * num_lines());
}

ConstraintMask ScreeningResult::to_mask() const {
  ConstraintMask m = ConstraintMask::full(num_lines());
  for (int l = 0; l < num_lines(); ++l) {
    m.at(l, Side::Lower) = !sides[l][0].removable;
    m.at(l, Side::Upper) = !sides[l][1].removable;
  }
  return m;
}

ScreeningResult intersect(const std::vector<ScreeningResult>& results) {
  if (results.empty()) throw LineSetMismatch("nothing to intersect");
  ScreeningResult out = results.front();
  out.method = "intersect(" + results.front().method + ")";
  for (size_t r = 1; r < results.size(); ++r) {
    if (results[r].num_lines() != out.num_lines())
      throw LineSetMismatch("screening results cover different line sets");
    for (int l = 0; l < out.num_lines(); ++l) {
      for (int k = 0; k < 2; ++k) {
        auto& acc = out.sides[l][k];
        const auto& b = results[r].sides[l][k];
        acc.removable = acc.removable && b.removable;
        // keep the most adverse extreme across inputs
        acc.extreme_flow = k == 1 ? std::max(acc.extreme_flow, b.extreme_flow)
                                  : std::min(acc.extreme_flow, b.extreme_flow);
      }
    }
  }
  return out;
}

ScreeningResult ScreeningResult::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ScreeningResult r;
  r.method = j.at("method").get<std::string>();
  r.config_digest = j.at("config_digest").get<std::string>();
  r.timestamp = j.value("timestamp", "");
  int L = j.at("num_lines").get<int>();
  r.sides.resize(L);
  for (const auto& js : j.at("sides")) {
    ScreeningBound b;
    b.line = js.at("line").get<int>();
    b.side = js.at("side").get<std::string>() == "upper" ? Side::Upper : Side::Lower;
    b.extreme_flow = js.at("extreme_flow").is_string()
                         ? (b.side == Side::Upper ? kInf : -kInf)
                         : js.at("extreme_flow").get<double>();
    b.capacity = js.at("capacity").get<double>();
    b.removable = js.at("removable").get<bool>();
    b.status = status_from_name(js.at("status").get<std::string>());
    r.sides[b.line][b.side == Side::Lower ? 0 : 1] = b;
  }
  return r;
}

ScreeningResult ScreeningResult::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open certificate: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ScreeningResult::to_json_text() const {
  nlohmann::json j;
  j["method"] = method;
  j["config_digest"] = config_digest;
  j["timestamp"] = timestamp;
  j["num_lines"] = num_lines();
  j["sides"] = nlohmann::json::array();
  for (const auto& pair : sides) {
    for (const auto& b : {pair[0], pair[1]}) {
      nlohmann::json js;
      js["line"] = b.line;
      js["side"] = side_name(b.side);
      if (std::isfinite(b.extreme_flow))
        js["extreme_flow"] = b.extreme_flow;
      else
        js["extreme_flow"] = "unbounded";
      js["capacity"] = b.capacity;
      js["removable"] = b.removable;
      js["status"] = status_name(b.status);
      j["sides"].push_back(js);
    }
  }
  return j.dump(2);
}

}  // namespace ucs
