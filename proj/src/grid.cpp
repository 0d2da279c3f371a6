#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "ucs/grid.hpp"

namespace ucs {

int Grid::bus_index(const std::string& name) const {
  for (int i = 0; i < num_buses(); ++i)
    if (buses[i] == name) return i;
  throw std::invalid_argument("unknown bus: " + name);
}

int Grid::line_index(const std::string& id) const {
  for (int i = 0; i < num_lines(); ++i)
    if (lines[i].id == id) return i;
  throw std::invalid_argument("unknown line: " + id);
}

std::vector<std::vector<int>> Grid::generators_by_bus() const {
  std::vector<std::vector<int>> by_bus(num_buses());
  for (int g = 0; g < num_generators(); ++g) by_bus[generators[g].bus].push_back(g);
  return by_bus;
}

bool Grid::is_connected() const {
  if (buses.empty()) return false;
  std::vector<char> seen(num_buses(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  std::vector<std::vector<int>> adj(num_buses());
  for (const auto& l : lines) {
    adj[l.from_bus].push_back(l.to_bus);
    adj[l.to_bus].push_back(l.from_bus);
  }
  while (!q.empty()) {
    int n = q.front();
    q.pop();
    for (int nb : adj[n])
      if (!seen[nb]) {
        seen[nb] = 1;
        ++count;
        q.push(nb);
      }
  }
  return count == num_buses();
}

void Grid::validate() const {
  if (buses.empty()) throw std::invalid_argument("grid has no buses");
  if (slack_bus < 0 || slack_bus >= num_buses())
    throw std::invalid_argument("slack bus out of range");
  for (const auto& l : lines) {
    if (l.from_bus < 0 || l.from_bus >= num_buses() || l.to_bus < 0 ||
        l.to_bus >= num_buses())
      throw std::invalid_argument("line " + l.id + " references unknown bus");
    if (l.from_bus == l.to_bus)
      throw std::invalid_argument("line " + l.id + " is a self-loop");
    if (!(l.susceptance > 0.0))
      throw std::invalid_argument("line " + l.id + " susceptance must be > 0");
    if (!(l.capacity > 0.0))
      throw std::invalid_argument("line " + l.id + " capacity must be > 0");
  }
  for (const auto& g : generators) {
    if (g.bus < 0 || g.bus >= num_buses())
      throw std::invalid_argument("generator " + g.id + " references unknown bus");
    if (!(0.0 <= g.p_min && g.p_min <= g.p_max))
      throw std::invalid_argument("generator " + g.id + " needs 0 <= pmin <= pmax");
    if (g.marginal_cost < 0.0)
      throw std::invalid_argument("generator " + g.id + " cost must be >= 0");
  }
  if (!is_connected()) throw DisconnectedGraph("grid is not a single island");
}

Grid Grid::without_line(const std::string& line_id) const {
  Grid g = *this;
  int idx = line_index(line_id);
  g.lines.erase(g.lines.begin() + idx);
  return g;
}

Grid Grid::from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Grid g;
  for (const auto& b : j.at("buses")) g.buses.push_back(b.get<std::string>());
  for (const auto& jl : j.at("lines")) {
    Line l;
    l.id = jl.at("id").get<std::string>();
    l.from_bus = g.bus_index(jl.at("from").get<std::string>());
    l.to_bus = g.bus_index(jl.at("to").get<std::string>());
    l.susceptance = jl.at("susceptance").get<double>();
    l.capacity = jl.at("capacity").get<double>();
    g.lines.push_back(l);
  }
  for (const auto& jg : j.at("generators")) {
    Generator gen;
    gen.id = jg.at("id").get<std::string>();
    gen.bus = g.bus_index(jg.at("bus").get<std::string>());
    gen.marginal_cost = jg.at("cost").get<double>();
    gen.p_min = jg.at("pmin").get<double>();
    gen.p_max = jg.at("pmax").get<double>();
    g.generators.push_back(gen);
  }
  g.slack_bus = g.bus_index(j.at("slack").get<std::string>());
  g.validate();
  return g;
}

Grid Grid::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string Grid::to_json_text() const {
  nlohmann::json j;
  j["buses"] = buses;
  j["slack"] = buses[slack_bus];
  j["lines"] = nlohmann::json::array();
  for (const auto& l : lines)
    j["lines"].push_back({{"id", l.id},
                          {"from", buses[l.from_bus]},
                          {"to", buses[l.to_bus]},
                          {"susceptance", l.susceptance},
                          {"capacity", l.capacity}});
  j["generators"] = nlohmann::json::array();
  for (const auto& g : generators)
    j["generators"].push_back({{"id", g.id},
                               {"bus", buses[g.bus]},
                               {"cost", g.marginal_cost},
                               {"pmin", g.p_min},
                               {"pmax", g.p_max}});
  return j.dump(2);
}

PtdfMatrix build_ptdf(const Grid& grid) {
  if (!grid.is_connected()) throw DisconnectedGraph("grid is not a single island");
  const int n = grid.num_buses();
  const int nl = grid.num_lines();
  const int slack = grid.slack_bus;

  // nodal susceptance matrix B and susceptance-weighted incidence Bf
  Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(nl, n);
  for (int l = 0; l < nl; ++l) {
    const auto& ln = grid.lines[l];
    double b = ln.susceptance;
    bbus(ln.from_bus, ln.from_bus) += b;
    bbus(ln.to_bus, ln.to_bus) += b;
    bbus(ln.from_bus, ln.to_bus) -= b;
    bbus(ln.to_bus, ln.from_bus) -= b;
    bf(l, ln.from_bus) = b;
    bf(l, ln.to_bus) = -b;
  }

  // drop slack row/column, factorize, and map back with a zero slack column
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int i = 0; i < n; ++i)
    if (i != slack) keep.push_back(i);
  Eigen::MatrixXd bred(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i)
    for (int j = 0; j < n - 1; ++j) bred(i, j) = bbus(keep[i], keep[j]);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(bred);
  if (!lu.isInvertible())
    throw SingularSusceptanceMatrix("reduced susceptance matrix is singular");

  Eigen::MatrixXd bf_red(nl, n - 1);
  for (int j = 0; j < n - 1; ++j) bf_red.col(j) = bf.col(keep[j]);

  // A_red = Bf_red * Bred^{-1}, solved column-block via Bred^T y = Bf_red^T
  Eigen::FullPivLU<Eigen::MatrixXd> lut(bred.transpose());
  Eigen::MatrixXd a_red = lut.solve(bf_red.transpose()).transpose();

  PtdfMatrix ptdf;
  ptdf.slack_bus = slack;
  ptdf.values = Eigen::MatrixXd::Zero(nl, n);
  for (int j = 0; j < n - 1; ++j) ptdf.values.col(keep[j]) = a_red.col(j);
  return ptdf;
}

Eigen::VectorXd line_flows(const PtdfMatrix& ptdf, const InjectionVector& q) {
  if (q.size() != ptdf.values.cols())
    throw DimensionMismatch("injection vector length does not match PTDF columns");
  return ptdf.values * q;
}

}  // namespace ucs
