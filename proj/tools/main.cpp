#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucs/harness.hpp"

namespace {

// stage-tagged exit codes
constexpr int kExitData = 3;
constexpr int kExitFit = 4;
constexpr int kExitScreen = 5;
constexpr int kExitSolve = 6;
constexpr int kExitEval = 7;
constexpr int kExitTopo = 8;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int fail(int code, const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission-constraint screening toolkit for DC unit commitment"};
  app.require_subcommand(1);

  std::string grid_path, history_path, out_dir = "out", xi_path, demand_path;
  std::vector<std::string> methods{"bn", "ub", "cc", "ubcc"};
  int segments = 1, elbow = 0, n_periods = 8640, worst_case = 0, n_threads = 0;
  double kappa = 1.0, test_frac = 1.0 / 6.0, l_min = 50000.0, l_max = 70000.0,
         width = 0.05, margin = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> outages;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--grid", grid_path, "grid JSON file")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", n_threads, "worker threads (0 = auto)");
  };

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic demand history");
  add_common(gen);
  gen->add_option("--xi", xi_path, "allocation factors CSV (bus,value)")->required();
  gen->add_option("--periods", n_periods, "number of periods");
  gen->add_option("--l-min", l_min, "minimum system demand (MW)");
  gen->add_option("--l-max", l_max, "maximum system demand (MW)");
  gen->add_option("--width", width, "per-bus uniform width fraction");

  auto* fit = app.add_subcommand("fit", "fit cost bound and demand sets from history");
  add_common(fit);
  fit->add_option("--history", history_path, "demand history CSV")->required();
  fit->add_option("--segments", segments, "segment count for the cost bound");
  fit->add_option("--elbow", elbow, "pick segments by elbow up to this count");
  fit->add_option("--margin", margin, "widen fitted demand range by this many MW");

  auto* screen = app.add_subcommand("screen", "write screening certificates");
  add_common(screen);
  screen->add_option("--history", history_path, "demand history CSV")->required();
  screen->add_option("--method", methods, "methods: bn ub cc ubcc");
  screen->add_option("--segments", segments, "segment count for the cost bound");
  screen->add_option("--elbow", elbow, "pick segments by elbow up to this count");
  screen->add_option("--kappa", kappa, "hull weight-sum cap (>= 1)");
  screen->add_option("--margin", margin, "widen fitted demand range by this many MW");

  auto* solve = app.add_subcommand("solve", "solve full or reduced UC for one demand file");
  add_common(solve);
  solve->add_option("--demand", demand_path, "single-period demand CSV")->required();
  std::string certificate_path;
  solve->add_option("--certificate", certificate_path,
                    "screening certificate; omitted = full model");

  auto* eval = app.add_subcommand("eval", "full evaluation pipeline");
  add_common(eval);
  eval->add_option("--history", history_path, "demand history CSV");
  eval->add_option("--xi", xi_path, "generate history from these allocation factors");
  eval->add_option("--periods", n_periods, "generated periods");
  eval->add_option("--l-min", l_min, "minimum system demand (MW)");
  eval->add_option("--l-max", l_max, "maximum system demand (MW)");
  eval->add_option("--width", width, "per-bus uniform width fraction");
  eval->add_option("--method", methods, "methods: bn ub cc ubcc");
  eval->add_option("--segments", segments, "segment count for the cost bound");
  eval->add_option("--elbow", elbow, "pick segments by elbow up to this count");
  eval->add_option("--kappa", kappa, "hull weight-sum cap (>= 1)");
  eval->add_option("--margin", margin, "widen fitted demand range by this many MW");
  eval->add_option("--test-frac", test_frac, "random test fraction");
  eval->add_option("--worst-case", worst_case,
                   "worst-case split: top-N aggregate demands go to the test set");
  std::string test_history_path;
  eval->add_option("--test-history", test_history_path,
                   "explicit test-set CSV; history becomes the training set");

  auto* topo = app.add_subcommand("topo", "single-line-outage intersection experiment");
  add_common(topo);
  topo->add_option("--history", history_path, "demand history CSV")->required();
  topo->add_option("--outage", outages, "line ids that may be out of service")->required();
  topo->add_option("--method", methods, "method used for every variant");
  topo->add_option("--segments", segments, "segment count for the cost bound");
  topo->add_option("--kappa", kappa, "hull weight-sum cap (>= 1)");

  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;

  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    return fail(kExitData, e);
  }

  if (gen->parsed()) {
    try {
      ucs::Grid grid = ucs::Grid::from_json_file(grid_path);
      Eigen::VectorXd xi = ucs::load_allocation_factors(xi_path, grid);
      auto history =
          ucs::generate_history(xi, n_periods, {l_min, l_max}, width, seed);
      write_file(out_dir + "/history.csv", history.to_csv_text(grid.buses));
      std::cout << "wrote " << out_dir << "/history.csv (" << n_periods
                << " periods)\n";
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitData, e);
    }
  }

  auto fit_bound = [&](const ucs::Grid& grid, const ucs::PtdfMatrix& ptdf,
                       const ucs::DemandHistory& history) {
    std::vector<ucs::CostPoint> pts;
    auto mask = ucs::ConstraintMask::full(grid.num_lines());
    for (int t = 0; t < history.num_periods(); ++t) {
      auto d = history.record(t);
      auto out = ucs::solve_uc(grid, ptdf, d, mask);
      if (out.status == ucs::SolveStatus::Optimal)
        pts.push_back({d.values.sum(), out.solution.cost});
    }
    int n_seg = elbow > 0 ? ucs::select_segments_elbow(pts, elbow) : segments;
    return ucs::fit_cost_bound(pts, n_seg, margin);
  };

  if (fit->parsed()) {
    try {
      ucs::Grid grid = ucs::Grid::from_json_file(grid_path);
      ucs::PtdfMatrix ptdf = ucs::build_ptdf(grid);
      auto history = ucs::DemandHistory::from_csv_file(history_path);
      auto bound = fit_bound(grid, ptdf, history);
      write_file(out_dir + "/cost_bound.json", bound.to_json_text());
      auto box = ucs::box_from_history(history);
      std::cout << "wrote " << out_dir << "/cost_bound.json ("
                << bound.segments.size() << " segments, box over "
                << box.num_buses() << " buses)\n";
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitFit, e);
    }
  }

  if (screen->parsed()) {
    try {
      ucs::Grid grid = ucs::Grid::from_json_file(grid_path);
      ucs::PtdfMatrix ptdf = ucs::build_ptdf(grid);
      auto history = ucs::DemandHistory::from_csv_file(history_path);
      std::optional<ucs::CostBoundModel> bound;
      for (const auto& m : methods)
        if (m == "ub" || m == "ubcc") {
          bound = fit_bound(grid, ptdf, history);
          break;
        }
      for (const auto& m : methods) {
        auto cfg = ucs::make_method(m, history, bound, kappa);
        auto result = ucs::screen_all(grid, ptdf, cfg, {}, n_threads);
        write_file(out_dir + "/certificate_" + m + ".json", result.to_json_text());
        std::cout << m << ": retained " << result.retained_count() << "/"
                  << 2 * grid.num_lines() << "\n";
      }
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitScreen, e);
    }
  }

  if (solve->parsed()) {
    try {
      ucs::Grid grid = ucs::Grid::from_json_file(grid_path);
      ucs::PtdfMatrix ptdf = ucs::build_ptdf(grid);
      auto demand = ucs::DemandHistory::from_csv_file(demand_path);
      auto mask = ucs::ConstraintMask::full(grid.num_lines());
      if (!certificate_path.empty())
        mask = ucs::ScreeningResult::from_json_file(certificate_path).to_mask();
      for (int t = 0; t < demand.num_periods(); ++t) {
        auto d = demand.record(t);
        auto out = ucs::solve_uc(grid, ptdf, d, mask);
        if (out.status != ucs::SolveStatus::Optimal) {
          std::cout << d.label << ": "
                    << (out.status == ucs::SolveStatus::Infeasible ? "infeasible"
                                                                   : "unbounded")
                    << "\n";
          continue;
        }
        nlohmann::json j;
        j["period"] = d.label;
        j["cost"] = out.solution.cost;
        j["commitment"] = out.solution.commitment;
        std::vector<double> disp(out.solution.dispatch.begin(),
                                 out.solution.dispatch.end());
        std::vector<double> flows(out.solution.flows.begin(),
                                  out.solution.flows.end());
        j["dispatch"] = disp;
        j["flows"] = flows;
        write_file(out_dir + "/solution_" + d.label + ".json", j.dump(2));
        std::cout << d.label << ": cost " << out.solution.cost << "\n";
      }
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitSolve, e);
    }
  }

  if (eval->parsed()) {
    try {
      ucs::ExperimentConfig cfg;
      cfg.grid_path = grid_path;
      cfg.history_path = history_path;
      if (history_path.empty()) {
        if (xi_path.empty())
          throw std::runtime_error("eval needs --history or --xi");
        ucs::GeneratorSpec gs;
        gs.xi_path = xi_path;
        gs.n_periods = n_periods;
        gs.L_min = l_min;
        gs.L_max = l_max;
        gs.width = width;
        gs.seed = seed;
        cfg.generator = gs;
      }
      cfg.methods = methods;
      cfg.n_segments = segments;
      cfg.elbow_max = elbow;
      cfg.kappa = kappa;
      cfg.range_margin = margin;
      cfg.n_threads = n_threads;
      cfg.out_dir = out_dir;
      cfg.test_history_path = test_history_path;
      if (worst_case > 0) {
        cfg.split.kind = ucs::SplitSpec::Kind::WorstCase;
        cfg.split.n_test = worst_case;
      } else {
        cfg.split.kind = ucs::SplitSpec::Kind::RandomFraction;
        cfg.split.test_fraction = test_frac;
        cfg.split.seed = seed;
      }
      auto report = ucs::run_pipeline(cfg);
      std::cout << report.to_table_text();
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitEval, e);
    }
  }

  if (topo->parsed()) {
    try {
      ucs::Grid grid = ucs::Grid::from_json_file(grid_path);
      ucs::PtdfMatrix ptdf = ucs::build_ptdf(grid);
      auto history = ucs::DemandHistory::from_csv_file(history_path);
      std::optional<ucs::CostBoundModel> bound;
      std::string method = methods.empty() ? "ubcc" : methods.front();
      if (method == "ub" || method == "ubcc") bound = fit_bound(grid, ptdf, history);
      auto cfg = ucs::make_method(method, history, bound, kappa);
      auto out = ucs::topology_experiment(grid, outages, cfg, {}, n_threads);
      write_file(out_dir + "/intersection.json", out.intersection.to_json_text());
      for (size_t i = 0; i < out.variant_names.size(); ++i)
        std::cout << out.variant_names[i] << ": removable "
                  << 100.0 * out.removable_fraction[i] << "%\n";
      std::cout << "intersection: removable "
                << 100.0 * out.intersection.removable_fraction() << "%\n";
      return 0;
    } catch (const std::exception& e) {
      return fail(kExitTopo, e);
    }
  }

  return 0;
}
