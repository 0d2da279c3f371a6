#include <cmath>
#include <queue>

#include "ucs/lp.hpp"

namespace ucs {

namespace {

constexpr double kIntTol = 1e-6;

struct Node {
  double bound;  // relaxation objective, min-sense
  int id;
  int depth;
  std::vector<std::pair<int, double>> fixings;  // (binary var, 0 or 1)

  bool operator<(const Node& o) const {
    if (bound != o.bound) return bound > o.bound;  // min-heap on bound
    return id > o.id;
  }
};

int most_fractional(const LinearProgram& lp, const std::vector<double>& x) {
  int best = -1;
  double best_dist = kIntTol;
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (!lp.binary[j]) continue;
    double frac = x[j] - std::floor(x[j]);
    double dist = std::min(frac, 1.0 - frac);
    if (dist > best_dist) {
      best_dist = dist;
      best = j;
    }
  }
  return best;
}

}  // namespace

SolveOutcome solve_milp(const LinearProgram& lp, const MilpOptions& opts) {
  if (!lp.has_integers()) return solve_lp(lp, opts.lp_opts);

  const double dir = lp.sense == Sense::Minimize ? 1.0 : -1.0;

  LinearProgram relax = lp;
  std::fill(relax.binary.begin(), relax.binary.end(), 0);

  auto solve_node = [&](const std::vector<std::pair<int, double>>& fixings) {
    for (auto [j, v] : fixings) {
      relax.lower[j] = v;
      relax.upper[j] = v;
    }
    SolveOutcome out = solve_lp(relax, opts.lp_opts);
    for (auto [j, v] : fixings) {
      relax.lower[j] = lp.lower[j];
      relax.upper[j] = lp.upper[j];
    }
    return out;
  };

  SolveOutcome root = solve_node({});
  if (root.status == SolveStatus::Infeasible)
    return SolveOutcome{SolveStatus::Infeasible, 0.0, {}, {}, false};
  if (root.status == SolveStatus::Unbounded)
    return SolveOutcome{SolveStatus::Unbounded, 0.0, {}, {}, false};

  bool have_incumbent = false;
  SolveOutcome incumbent;
  double best_obj = kInf;  // min-sense

  std::priority_queue<Node> open;
  int next_id = 0;
  open.push(Node{dir * root.objective, next_id++, 0, {}});
  // stash root solution alongside: resolve nodes on pop instead of storing
  // primal vectors in the queue

  int nodes = 0;
  while (!open.empty()) {
    Node node = open.top();
    open.pop();

    double gap_ref = std::max(1.0, std::abs(best_obj));
    if (have_incumbent && node.bound >= best_obj - opts.gap * gap_ref) break;

    if (++nodes > opts.node_cap)
      throw NodeBudgetExceeded("branch-and-bound node cap exceeded");

    SolveOutcome out = solve_node(node.fixings);
    if (out.status != SolveStatus::Optimal) continue;
    double bound = dir * out.objective;
    if (have_incumbent && bound >= best_obj - opts.gap * gap_ref) continue;

    int branch_var = most_fractional(lp, out.primal);
    if (branch_var < 0) {
      // integer feasible
      if (!have_incumbent || bound < best_obj) {
        best_obj = bound;
        incumbent = out;
        have_incumbent = true;
      }
      continue;
    }
    if (node.depth >= opts.depth_cap)
      throw NodeBudgetExceeded("branch-and-bound depth cap exceeded");

    for (double v : {0.0, 1.0}) {
      Node child{bound, next_id++, node.depth + 1, node.fixings};
      child.fixings.emplace_back(branch_var, v);
      open.push(child);
    }
  }

  if (!have_incumbent)
    return SolveOutcome{SolveStatus::Infeasible, 0.0, {}, {}, false};
  // round binaries that are integral to tolerance
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.binary[j]) incumbent.primal[j] = std::round(incumbent.primal[j]);
  double obj = 0.0;
  for (int j = 0; j < lp.num_vars(); ++j)
    obj += lp.objective[j] * incumbent.primal[j];
  incumbent.objective = obj;
  incumbent.has_duals = false;
  incumbent.duals.clear();
  return incumbent;
}

}  // namespace ucs
