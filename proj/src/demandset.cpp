#include <fstream>
#include <random>
#include <sstream>

#include "ucs/demandset.hpp"
#include "ucs/lp.hpp"

namespace ucs {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

DemandHistory DemandHistory::from_csv_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) throw EmptyHistory("empty history CSV");
  auto header = split_csv_line(line);
  bool labeled = !header.empty() && header[0] == "period";
  int first_col = labeled ? 1 : 0;
  int nbus = static_cast<int>(header.size()) - first_col;
  if (nbus <= 0) throw EmptyHistory("history CSV has no bus columns");

  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != nbus + first_col)
      throw std::runtime_error("ragged history CSV row: " + line);
    if (labeled) labels.push_back(cells[0]);
    std::vector<double> row(nbus);
    for (int j = 0; j < nbus; ++j) row[j] = std::stod(cells[j + first_col]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyHistory("history CSV has no data rows");

  DemandHistory h;
  h.values.resize(static_cast<int>(rows.size()), nbus);
  for (int t = 0; t < h.num_periods(); ++t)
    for (int j = 0; j < nbus; ++j) h.values(t, j) = rows[t][j];
  h.period_labels = std::move(labels);
  return h;
}

DemandHistory DemandHistory::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open history file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv_text(ss.str());
}

std::string DemandHistory::to_csv_text(const std::vector<std::string>& bus_names) const {
  if (!bus_names.empty() && static_cast<int>(bus_names.size()) != num_buses())
    throw std::invalid_argument("bus name count does not match history columns");
  std::ostringstream os;
  os.precision(17);
  os << "period";
  for (int j = 0; j < num_buses(); ++j)
    os << "," << (bus_names.empty() ? "b" + std::to_string(j) : bus_names[j]);
  os << "\n";
  for (int t = 0; t < num_periods(); ++t) {
    os << (t < static_cast<int>(period_labels.size()) ? period_labels[t]
                                                      : "t" + std::to_string(t + 1));
    for (int j = 0; j < num_buses(); ++j) os << "," << values(t, j);
    os << "\n";
  }
  return os.str();
}

int DemandSet::num_buses() const {
  return std::visit(
      [](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SingletonSet>)
          return static_cast<int>(s.demand.size());
        else if constexpr (std::is_same_v<T, BoxSet>)
          return static_cast<int>(s.lower.size());
        else
          return static_cast<int>(s.history.cols());
      },
      variant);
}

std::string DemandSet::kind() const {
  if (std::holds_alternative<SingletonSet>(variant)) return "singleton";
  if (std::holds_alternative<BoxSet>(variant)) return "box";
  return "hull";
}

DemandSet singleton_set(const Eigen::VectorXd& d) {
  return DemandSet{SingletonSet{d}};
}

DemandSet box_from_history(const DemandHistory& history) {
  if (history.num_periods() < 1) throw EmptyHistory("box needs >= 1 period");
  BoxSet box;
  box.lower = history.values.colwise().minCoeff().transpose();
  box.upper = history.values.colwise().maxCoeff().transpose();
  return DemandSet{std::move(box)};
}

DemandSet hull_from_history(const DemandHistory& history, double kappa) {
  if (history.num_periods() < 1) throw EmptyHistory("hull needs >= 1 period");
  if (kappa < 1.0) throw std::invalid_argument("kappa must be >= 1");
  return DemandSet{ConvexHullSet{history.values, kappa}};
}

bool membership(const DemandSet& set, const DemandRecord& d, double tol) {
  if (d.values.size() != set.num_buses())
    throw std::invalid_argument("demand record length does not match set");
  if (const auto* s = std::get_if<SingletonSet>(&set.variant))
    return (d.values - s->demand).lpNorm<Eigen::Infinity>() <= tol;
  if (const auto* s = std::get_if<BoxSet>(&set.variant))
    return (d.values.array() >= s->lower.array() - tol).all() &&
           (d.values.array() <= s->upper.array() + tol).all();

  const auto& hull = std::get<ConvexHullSet>(set.variant);
  const int T = static_cast<int>(hull.history.rows());
  const int N = static_cast<int>(hull.history.cols());
  LinearProgram lp;
  for (int t = 0; t < T; ++t) lp.add_variable(0.0, kInf, 0.0);
  for (int n = 0; n < N; ++n) {
    std::vector<std::pair<int, double>> row;
    for (int t = 0; t < T; ++t)
      if (hull.history(t, n) != 0.0) row.emplace_back(t, hull.history(t, n));
    lp.add_row(std::move(row), Relation::Eq, d.values[n]);
  }
  std::vector<std::pair<int, double>> ones;
  for (int t = 0; t < T; ++t) ones.emplace_back(t, 1.0);
  lp.add_row(ones, Relation::Ge, 1.0);
  lp.add_row(ones, Relation::Le, hull.kappa);
  return solve_lp(lp).status == SolveStatus::Optimal;
}

DemandHistory generate_history(const Eigen::VectorXd& xi, int n_periods,
                               std::pair<double, double> L_range, double width,
                               std::uint64_t seed) {
  if (n_periods < 1) throw InvalidRange("n_periods must be >= 1");
  if (!(L_range.first <= L_range.second) || L_range.first < 0.0)
    throw InvalidRange("invalid system demand range");
  if (width < 0.0 || width >= 1.0) throw InvalidRange("width must be in [0,1)");
  if ((xi.array() < 0.0).any() || xi.sum() <= 0.0)
    throw InvalidRange("allocation factors must be >= 0 with positive sum");
  Eigen::VectorXd xin = xi / xi.sum();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uL(L_range.first, L_range.second);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  DemandHistory h;
  h.values.resize(n_periods, xi.size());
  for (int t = 0; t < n_periods; ++t) {
    double L = uL(rng);
    for (int n = 0; n < xi.size(); ++n) {
      double mid = L * xin[n];
      double lo = (1.0 - width) * mid, hi = (1.0 + width) * mid;
      h.values(t, n) = lo + (hi - lo) * u01(rng);
    }
  }
  return h;
}

}  // namespace ucs
