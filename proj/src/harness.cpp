#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ucs/harness.hpp"

namespace ucs {

namespace {

namespace fs = std::filesystem;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

DemandHistory take_rows(const DemandHistory& h, const std::vector<int>& idx) {
  DemandHistory out;
  out.values.resize(static_cast<int>(idx.size()), h.num_buses());
  for (size_t i = 0; i < idx.size(); ++i) {
    out.values.row(static_cast<int>(i)) = h.values.row(idx[i]);
    out.period_labels.push_back(h.record(idx[i]).label);
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

std::pair<DemandHistory, DemandHistory> random_split(const DemandHistory& history,
                                                     double test_fraction,
                                                     std::uint64_t seed) {
  const int T = history.num_periods();
  int n_test = static_cast<int>(std::lround(test_fraction * T));
  if (n_test < 0 || n_test >= T)
    throw InvalidSplit("test fraction leaves no training data");
  std::vector<int> idx(T);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<int> test(idx.begin(), idx.begin() + n_test);
  std::vector<int> train(idx.begin() + n_test, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {take_rows(history, train), take_rows(history, test)};
}

std::pair<DemandHistory, DemandHistory> worst_case_split(const DemandHistory& history,
                                                         int n_test) {
  const int T = history.num_periods();
  if (n_test <= 0 || n_test >= T) throw InvalidSplit("n_test must be in (0, periods)");
  std::vector<int> idx(T);
  std::iota(idx.begin(), idx.end(), 0);
  Eigen::VectorXd agg = history.values.rowwise().sum();
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (agg[a] != agg[b]) return agg[a] > agg[b];
    return a < b;
  });
  std::vector<int> test(idx.begin(), idx.begin() + n_test);
  std::vector<int> train(idx.begin() + n_test, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {take_rows(history, train), take_rows(history, test)};
}

Eigen::VectorXd load_allocation_factors(const std::string& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open allocation factors: " + path);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(grid.num_buses());
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("allocation factor rows must be bus,value");
    std::string bus = line.substr(0, comma);
    if (first && bus == "bus") {  // optional header
      first = false;
      continue;
    }
    first = false;
    xi[grid.bus_index(bus)] = std::stod(line.substr(comma + 1));
  }
  return xi;
}

EvaluationReport run_pipeline(const ExperimentConfig& config) {
  Grid grid = Grid::from_json_file(config.grid_path);
  PtdfMatrix ptdf = build_ptdf(grid);

  DemandHistory history;
  try {
    if (config.generator) {
      const auto& gen = *config.generator;
      Eigen::VectorXd xi = load_allocation_factors(gen.xi_path, grid);
      history = generate_history(xi, gen.n_periods, {gen.L_min, gen.L_max},
                                 gen.width, gen.seed);
    } else {
      history = DemandHistory::from_csv_file(config.history_path);
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage=data: ") + e.what());
  }
  if (history.num_buses() != grid.num_buses())
    throw std::runtime_error("stage=data: history bus count does not match grid");

  DemandHistory train, test;
  if (!config.test_history_path.empty()) {
    train = history;
    test = DemandHistory::from_csv_file(config.test_history_path);
    if (test.num_buses() != grid.num_buses())
      throw std::runtime_error("stage=data: test history bus count does not match grid");
  } else if (config.split.kind == SplitSpec::Kind::WorstCase) {
    std::tie(train, test) = worst_case_split(history, config.split.n_test);
  } else {
    std::tie(train, test) =
        random_split(history, config.split.test_fraction, config.split.seed);
  }

  const bool persist = !config.out_dir.empty();
  if (persist) fs::create_directories(config.out_dir);
  if (persist) {
    write_file(config.out_dir + "/train.csv", train.to_csv_text(grid.buses));
    write_file(config.out_dir + "/test.csv", test.to_csv_text(grid.buses));
  }

  // step 1: solve training instances for (D, cost) points, fit the budget
  EvaluationReport report;
  report.train_size = train.num_periods();
  report.test_size = test.num_periods();

  bool needs_bound = false;
  for (const auto& m : config.methods)
    if (m == "ub" || m == "ubcc") needs_bound = true;

  std::optional<CostBoundModel> bound;
  std::vector<CostPoint> points;
  if (needs_bound) {
    try {
      auto full_mask = ConstraintMask::full(grid.num_lines());
      for (int t = 0; t < train.num_periods(); ++t) {
        DemandRecord d = train.record(t);
        UcOutcome out = solve_uc(grid, ptdf, d, full_mask, config.solver);
        if (out.status != SolveStatus::Optimal) {
          ++report.skipped_training;
          continue;
        }
        points.push_back(CostPoint{d.values.sum(), out.solution.cost});
      }
      int n_seg = config.elbow_max > 0
                      ? select_segments_elbow(points, config.elbow_max)
                      : config.n_segments;
      bound = fit_cost_bound(points, n_seg, config.range_margin);
      if (persist) write_file(config.out_dir + "/cost_bound.json", bound->to_json_text());
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage=fit: ") + e.what());
    }
  }

  // full-UC reference solves are shared across methods
  std::vector<SolveStatus> full_status(test.num_periods());
  std::vector<double> full_cost(test.num_periods(), 0.0);
  double full_time = 0.0;
  try {
    auto full_mask = ConstraintMask::full(grid.num_lines());
    for (int t = 0; t < test.num_periods(); ++t) {
      double t0 = now_s();
      UcOutcome out = solve_uc(grid, ptdf, test.record(t), full_mask, config.solver);
      full_time += now_s() - t0;
      full_status[t] = out.status;
      if (out.status == SolveStatus::Optimal) full_cost[t] = out.solution.cost;
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage=solve-full: ") + e.what());
  }

  for (const auto& name : config.methods) {
    MethodReport mr;
    mr.name = name;
    try {
      MethodConfig cfg = make_method(name, train, bound, config.kappa);

      double t0 = now_s();
      ScreeningResult screening =
          screen_all(grid, ptdf, cfg, config.solver, config.n_threads);
      mr.screening_time_s = now_s() - t0;
      if (persist)
        write_file(config.out_dir + "/certificate_" + name + ".json",
                   screening.to_json_text());

      ConstraintMask mask = screening.to_mask();
      mr.retained_count = mask.kept_count();
      mr.retained_pct = 100.0 * mr.retained_count / (2.0 * grid.num_lines());

      double err_sum_all = 0.0, err_sum_sub = 0.0;
      int evaluated = 0;
      for (int t = 0; t < test.num_periods(); ++t) {
        DemandRecord d = test.record(t);
        double t1 = now_s();
        UcOutcome reduced = solve_uc(grid, ptdf, d, mask, config.solver);
        mr.reduced_uc_time_s += now_s() - t1;
        if (reduced.status != SolveStatus::Optimal) {
          ++mr.n_infeasible;
          continue;
        }
        SolveOutcome fixed =
            fix_and_resolve(grid, ptdf, d, reduced.solution.commitment,
                            config.solver.lp_opts);
        if (fixed.status != SolveStatus::Optimal ||
            full_status[t] != SolveStatus::Optimal) {
          ++mr.n_infeasible;
          continue;
        }
        double ref = std::max(1.0, std::abs(full_cost[t]));
        double gap = (fixed.objective - full_cost[t]) / ref;
        ++evaluated;
        err_sum_all += std::max(0.0, gap) * 100.0;
        if (gap > 1e-6) {
          ++mr.n_suboptimal;
          err_sum_sub += gap * 100.0;
        } else {
          ++mr.n_exact;
        }
      }
      mr.cost_error_pct_all = evaluated > 0 ? err_sum_all / evaluated : 0.0;
      mr.cost_error_pct_suboptimal =
          mr.n_suboptimal > 0 ? err_sum_sub / mr.n_suboptimal : 0.0;
      mr.full_uc_time_s = full_time;
      mr.burden_pct = full_time > 0.0 ? 100.0 * mr.reduced_uc_time_s / full_time : 100.0;
    } catch (const std::exception& e) {
      throw std::runtime_error("stage=eval method=" + name + ": " + e.what());
    }
    report.methods.push_back(mr);
  }

  {
    std::ostringstream os;
    os << config.grid_path << "|" << report.train_size << "|" << report.test_size
       << "|" << config.kappa << "|" << config.n_segments << "|" << config.elbow_max;
    for (const auto& m : config.methods) os << "|" << m;
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : os.str()) {
      h ^= c;
      h *= 1099511628211ull;
    }
    std::ostringstream hx;
    hx << std::hex << h;
    report.config_digest = hx.str();
  }

  if (persist) emit_report(report, config.out_dir);
  return report;
}

TopologyOutcome topology_experiment(const Grid& grid,
                                    const std::vector<std::string>& outage_line_ids,
                                    const MethodConfig& base_config,
                                    const MilpOptions& opts, int n_threads) {
  for (const auto& id : outage_line_ids) {
    Grid variant = grid.without_line(id);
    if (!variant.is_connected())
      throw IslandingOutage("outage of " + id + " splits the grid");
  }

  TopologyOutcome out;
  PtdfMatrix base_ptdf = build_ptdf(grid);
  ScreeningResult base = screen_all(grid, base_ptdf, base_config, opts, n_threads);
  out.removable_fraction.push_back(base.removable_fraction());
  out.variant_names.push_back("base");

  std::vector<ScreeningResult> all{base};
  for (const auto& id : outage_line_ids) {
    Grid variant = grid.without_line(id);
    PtdfMatrix ptdf = build_ptdf(variant);

    // restrict hull/box/singleton sets to the same buses; demand model is
    // unchanged by a line outage
    ScreeningResult raw = screen_all(variant, ptdf, base_config, opts, n_threads);

    // map back onto the base line set; the outaged line carries no flow in
    // this variant, so both of its sides count as removable here
    ScreeningResult mapped;
    mapped.method = base_config.tag;
    mapped.config_digest = raw.config_digest;
    mapped.timestamp = raw.timestamp;
    mapped.sides.resize(grid.num_lines());
    int out_idx = grid.line_index(id);
    for (int l = 0, v = 0; l < grid.num_lines(); ++l) {
      if (l == out_idx) {
        for (int k = 0; k < 2; ++k) {
          ScreeningBound b;
          b.line = l;
          b.side = k == 0 ? Side::Lower : Side::Upper;
          b.capacity = grid.lines[l].capacity;
          b.extreme_flow = 0.0;
          b.removable = true;
          mapped.sides[l][k] = b;
        }
      } else {
        mapped.sides[l] = raw.sides[v++];
        mapped.sides[l][0].line = l;
        mapped.sides[l][1].line = l;
      }
    }
    out.removable_fraction.push_back(mapped.removable_fraction());
    out.variant_names.push_back("outage:" + id);
    all.push_back(std::move(mapped));
  }
  out.intersection = intersect(all);
  return out;
}

std::string EvaluationReport::to_json_text() const {
  nlohmann::json j;
  j["config_digest"] = config_digest;
  j["train_size"] = train_size;
  j["test_size"] = test_size;
  j["skipped_training"] = skipped_training;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : methods) {
    nlohmann::json jm;
    jm["name"] = m.name;
    jm["retained_count"] = m.retained_count;
    jm["retained_pct"] = m.retained_pct;
    jm["n_infeasible"] = m.n_infeasible;
    jm["n_suboptimal"] = m.n_suboptimal;
    jm["n_exact"] = m.n_exact;
    jm["cost_error_pct_all"] = m.cost_error_pct_all;
    jm["cost_error_pct_suboptimal"] = m.cost_error_pct_suboptimal;
    jm["timing"] = {{"screening_s", m.screening_time_s},
                    {"reduced_uc_s", m.reduced_uc_time_s},
                    {"full_uc_s", m.full_uc_time_s},
                    {"burden_pct", m.burden_pct}};
    j["methods"].push_back(jm);
  }
  return j.dump(2);
}

EvaluationReport EvaluationReport::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EvaluationReport r;
  r.config_digest = j.at("config_digest").get<std::string>();
  r.train_size = j.at("train_size").get<int>();
  r.test_size = j.at("test_size").get<int>();
  r.skipped_training = j.value("skipped_training", 0);
  for (const auto& jm : j.at("methods")) {
    MethodReport m;
    m.name = jm.at("name").get<std::string>();
    m.retained_count = jm.at("retained_count").get<int>();
    m.retained_pct = jm.at("retained_pct").get<double>();
    m.n_infeasible = jm.at("n_infeasible").get<int>();
    m.n_suboptimal = jm.at("n_suboptimal").get<int>();
    m.n_exact = jm.at("n_exact").get<int>();
    m.cost_error_pct_all = jm.at("cost_error_pct_all").get<double>();
    m.cost_error_pct_suboptimal = jm.at("cost_error_pct_suboptimal").get<double>();
    const auto& jt = jm.at("timing");
    m.screening_time_s = jt.at("screening_s").get<double>();
    m.reduced_uc_time_s = jt.at("reduced_uc_s").get<double>();
    m.full_uc_time_s = jt.at("full_uc_s").get<double>();
    m.burden_pct = jt.at("burden_pct").get<double>();
    r.methods.push_back(m);
  }
  return r;
}

EvaluationReport EvaluationReport::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string EvaluationReport::to_table_text() const {
  std::ostringstream os;
  os << std::fixed;
  auto row = [&](const std::string& label, auto getter, int prec) {
    os << std::left << std::setw(28) << label;
    for (const auto& m : methods)
      os << std::right << std::setw(12) << std::setprecision(prec) << getter(m);
    os << "\n";
  };
  os << std::left << std::setw(28) << "";
  for (const auto& m : methods) os << std::right << std::setw(12) << m.name;
  os << "\n";
  row("Retained constraints (%)", [](const MethodReport& m) { return m.retained_pct; }, 1);
  row("#Infeasibilities", [](const MethodReport& m) { return double(m.n_infeasible); }, 0);
  row("#Sub-optimal solutions", [](const MethodReport& m) { return double(m.n_suboptimal); }, 0);
  row("Cost error (%)", [](const MethodReport& m) { return m.cost_error_pct_all; }, 3);
  row("Cost error, subopt. (%)",
      [](const MethodReport& m) { return m.cost_error_pct_suboptimal; }, 3);
  row("Screening time (s)", [](const MethodReport& m) { return m.screening_time_s; }, 2);
  row("Reduced UC time (s)", [](const MethodReport& m) { return m.reduced_uc_time_s; }, 2);
  row("Computational burden (%)", [](const MethodReport& m) { return m.burden_pct; }, 1);
  return os.str();
}

void emit_report(const EvaluationReport& report, const std::string& dir) {
  fs::create_directories(dir);
  write_file(dir + "/report.json", report.to_json_text());
  write_file(dir + "/report.txt", report.to_table_text());
}

}  // namespace ucs
