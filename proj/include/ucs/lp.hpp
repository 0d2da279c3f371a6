#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ucs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Minimize, Maximize };
enum class Relation { Le, Ge, Eq };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct NumericalBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NodeBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense-at-solve-time LP/MILP container. Rows are stored sparsely as
/// (variable, coefficient) pairs for cheap assembly.
struct LinearProgram {
  Sense sense = Sense::Minimize;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<char> binary;

  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    Relation rel = Relation::Le;
    double rhs = 0.0;
    std::string name;
  };
  std::vector<Row> rows;

  int add_variable(double lo, double up, double cost, bool is_binary = false) {
    if (is_binary && (lo < -1e-12 || up > 1.0 + 1e-12))
      throw std::invalid_argument("binary variable bounds must lie in [0,1]");
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(up);
    binary.push_back(is_binary ? 1 : 0);
    return static_cast<int>(objective.size()) - 1;
  }

  void add_row(std::vector<std::pair<int, double>> coeffs, Relation rel,
               double rhs, std::string name = {}) {
    rows.push_back(Row{std::move(coeffs), rel, rhs, std::move(name)});
  }

  int num_vars() const { return static_cast<int>(objective.size()); }

  bool has_integers() const {
    for (char b : binary)
      if (b) return true;
    return false;
  }

  /// Plain-text dump in an LP-format-like layout for cross-checking
  /// against external solvers.
  std::string to_lp_text() const;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> duals;  // one per row, populated for pure LPs only
  bool has_duals = false;
};

struct SimplexOptions {
  double tol_feas = 1e-7;
  double tol_opt = 1e-7;
  int max_iters = 0;  // 0: auto from problem size
};

/// Two-phase primal simplex. Requires an LP with no integer-marked variables.
SolveOutcome solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

struct MilpOptions {
  double gap = 1e-6;
  int node_cap = 200000;
  int depth_cap = 200;
  SimplexOptions lp_opts;
};

/// Branch and bound over the binary variables; best-bound node selection,
/// most-fractional branching. Falls back to solve_lp when nothing is
/// integer-marked.
SolveOutcome solve_milp(const LinearProgram& lp, const MilpOptions& opts = {});

}  // namespace ucs
