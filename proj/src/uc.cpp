#include <cmath>

#include "ucs/uc.hpp"

namespace ucs {

namespace {

UcModel assemble(const Grid& grid, const PtdfMatrix& ptdf, const DemandRecord& d,
                 const ConstraintMask& mask, const std::vector<int>* fixed_u) {
  const int G = grid.num_generators();
  const int N = grid.num_buses();
  const int L = grid.num_lines();
  if (d.values.size() != N)
    throw DimensionMismatch("demand record length does not match bus count");
  if (ptdf.values.rows() != L || ptdf.values.cols() != N)
    throw DimensionMismatch("PTDF shape does not match grid");
  if (static_cast<int>(mask.keep.size()) != L)
    throw DimensionMismatch("mask does not cover every line");

  UcModel m;
  m.u0 = 0;
  for (int g = 0; g < G; ++g) {
    if (fixed_u) {
      double v = (*fixed_u)[g] ? 1.0 : 0.0;
      m.lp.add_variable(v, v, 0.0, false);
    } else {
      m.lp.add_variable(0.0, 1.0, 0.0, true);
    }
  }
  m.p0 = G;
  for (int g = 0; g < G; ++g)
    m.lp.add_variable(0.0, grid.generators[g].p_max,
                      grid.generators[g].marginal_cost);
  m.q0 = 2 * G;
  for (int n = 0; n < N; ++n) m.lp.add_variable(-kInf, kInf, 0.0);

  // q_n - sum_{g at n} p_g = -d_n
  auto by_bus = grid.generators_by_bus();
  for (int n = 0; n < N; ++n) {
    std::vector<std::pair<int, double>> row{{m.q0 + n, 1.0}};
    for (int g : by_bus[n]) row.emplace_back(m.p0 + g, -1.0);
    m.lp.add_row(std::move(row), Relation::Eq, -d.values[n], "inject_" + grid.buses[n]);
  }
  // sum q = 0
  {
    std::vector<std::pair<int, double>> row;
    for (int n = 0; n < N; ++n) row.emplace_back(m.q0 + n, 1.0);
    m.lp.add_row(std::move(row), Relation::Eq, 0.0, "balance");
  }
  // u pmin <= p <= u pmax
  for (int g = 0; g < G; ++g) {
    const auto& gen = grid.generators[g];
    m.lp.add_row({{m.p0 + g, 1.0}, {m.u0 + g, -gen.p_max}}, Relation::Le, 0.0,
                 "cap_" + gen.id);
    m.lp.add_row({{m.p0 + g, 1.0}, {m.u0 + g, -gen.p_min}}, Relation::Ge, 0.0,
                 "floor_" + gen.id);
  }
  // kept flow sides via PTDF rows
  for (int l = 0; l < L; ++l) {
    std::vector<std::pair<int, double>> row;
    for (int n = 0; n < N; ++n) {
      double a = ptdf.values(l, n);
      if (a != 0.0) row.emplace_back(m.q0 + n, a);
    }
    if (mask.at(l, Side::Upper))
      m.lp.add_row(row, Relation::Le, grid.lines[l].capacity,
                   "flow_" + grid.lines[l].id + "_up");
    if (mask.at(l, Side::Lower))
      m.lp.add_row(row, Relation::Ge, -grid.lines[l].capacity,
                   "flow_" + grid.lines[l].id + "_lo");
  }
  return m;
}

UcSolution extract(const Grid& grid, const PtdfMatrix& ptdf, const UcModel& m,
                   const SolveOutcome& out) {
  const int G = grid.num_generators();
  const int N = grid.num_buses();
  UcSolution sol;
  sol.commitment.resize(G);
  sol.dispatch.resize(G);
  for (int g = 0; g < G; ++g) {
    sol.commitment[g] = out.primal[m.u0 + g] > 0.5 ? 1 : 0;
    sol.dispatch[g] = out.primal[m.p0 + g];
  }
  sol.injections.resize(N);
  for (int n = 0; n < N; ++n) sol.injections[n] = out.primal[m.q0 + n];
  sol.flows = line_flows(ptdf, sol.injections);
  sol.cost = out.objective;
  return sol;
}

}  // namespace

UcModel build_full_uc(const Grid& grid, const PtdfMatrix& ptdf,
                      const DemandRecord& d) {
  return assemble(grid, ptdf, d, ConstraintMask::full(grid.num_lines()), nullptr);
}

UcModel build_uc(const Grid& grid, const PtdfMatrix& ptdf,
                 const DemandRecord& d, const ConstraintMask& mask) {
  return assemble(grid, ptdf, d, mask, nullptr);
}

UcOutcome solve_uc(const Grid& grid, const PtdfMatrix& ptdf,
                   const DemandRecord& d, const ConstraintMask& mask,
                   const MilpOptions& opts) {
  UcModel m = build_uc(grid, ptdf, d, mask);
  SolveOutcome out = solve_milp(m.lp, opts);
  UcOutcome res;
  res.status = out.status;
  if (out.status == SolveStatus::Optimal) res.solution = extract(grid, ptdf, m, out);
  return res;
}

SolveOutcome fix_and_resolve(const Grid& grid, const PtdfMatrix& ptdf,
                             const DemandRecord& d,
                             const std::vector<int>& commitment,
                             const SimplexOptions& opts) {
  if (static_cast<int>(commitment.size()) != grid.num_generators())
    throw DimensionMismatch("commitment length does not match fleet size");
  UcModel m = assemble(grid, ptdf, d, ConstraintMask::full(grid.num_lines()),
                       &commitment);
  for (auto& b : m.lp.binary) b = 0;  // u fixed by bounds; pure LP
  return solve_lp(m.lp, opts);
}

bool check_uc_solution(const Grid& grid, const PtdfMatrix& ptdf,
                       const DemandRecord& d, const ConstraintMask& mask,
                       const UcSolution& sol, double tol) {
  const int G = grid.num_generators();
  for (int g = 0; g < G; ++g) {
    const auto& gen = grid.generators[g];
    double lo = sol.commitment[g] * gen.p_min;
    double hi = sol.commitment[g] * gen.p_max;
    if (sol.dispatch[g] < lo - tol || sol.dispatch[g] > hi + tol) return false;
  }
  if (std::abs(sol.injections.sum()) > tol) return false;
  auto by_bus = grid.generators_by_bus();
  for (int n = 0; n < grid.num_buses(); ++n) {
    double p = 0.0;
    for (int g : by_bus[n]) p += sol.dispatch[g];
    if (std::abs(sol.injections[n] - (p - d.values[n])) > tol) return false;
  }
  Eigen::VectorXd f = line_flows(ptdf, sol.injections);
  for (int l = 0; l < grid.num_lines(); ++l) {
    if (mask.at(l, Side::Upper) && f[l] > grid.lines[l].capacity + tol) return false;
    if (mask.at(l, Side::Lower) && f[l] < -grid.lines[l].capacity - tol) return false;
  }
  double cost = 0.0;
  for (int g = 0; g < G; ++g) cost += grid.generators[g].marginal_cost * sol.dispatch[g];
  return std::abs(cost - sol.cost) <= tol * std::max(1.0, std::abs(cost));
}

}  // namespace ucs
