#pragma once

#include <array>

#include "ucs/demandset.hpp"
#include "ucs/grid.hpp"
#include "ucs/lp.hpp"

namespace ucs {

enum class Side { Lower, Upper };

inline const char* side_name(Side s) { return s == Side::Lower ? "lower" : "upper"; }

/// Keep/remove flag per (line, side); covers every line exactly twice.
struct ConstraintMask {
  std::vector<std::array<bool, 2>> keep;  // [line][0]=lower, [1]=upper

  static ConstraintMask full(int n_lines) {
    ConstraintMask m;
    m.keep.assign(n_lines, {true, true});
    return m;
  }

  bool& at(int line, Side side) { return keep[line][side == Side::Lower ? 0 : 1]; }
  bool at(int line, Side side) const { return keep[line][side == Side::Lower ? 0 : 1]; }

  int kept_count() const {
    int c = 0;
    for (const auto& k : keep) c += (k[0] ? 1 : 0) + (k[1] ? 1 : 0);
    return c;
  }
};

/// Assembled single-period UC model with variable offsets into the LP.
struct UcModel {
  LinearProgram lp;
  int u0 = 0;  // commitment block
  int p0 = 0;  // dispatch block
  int q0 = 0;  // injection block
};

struct UcSolution {
  std::vector<int> commitment;
  Eigen::VectorXd dispatch;    // MW per generator
  Eigen::VectorXd injections;  // MW per bus
  Eigen::VectorXd flows;       // MW per line
  double cost = 0.0;
};

struct UcOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  UcSolution solution;  // valid when status == Optimal
};

UcModel build_full_uc(const Grid& grid, const PtdfMatrix& ptdf,
                      const DemandRecord& d);

UcModel build_uc(const Grid& grid, const PtdfMatrix& ptdf,
                 const DemandRecord& d, const ConstraintMask& mask);

UcOutcome solve_uc(const Grid& grid, const PtdfMatrix& ptdf,
                   const DemandRecord& d, const ConstraintMask& mask,
                   const MilpOptions& opts = {});

/// Solves the full model (every line side enforced) with the commitment
/// fixed; pure LP.
SolveOutcome fix_and_resolve(const Grid& grid, const PtdfMatrix& ptdf,
                             const DemandRecord& d,
                             const std::vector<int>& commitment,
                             const SimplexOptions& opts = {});

/// Checks the solution against its own invariants (generation bounds,
/// balance, kept flow limits, cost identity).
bool check_uc_solution(const Grid& grid, const PtdfMatrix& ptdf,
                       const DemandRecord& d, const ConstraintMask& mask,
                       const UcSolution& sol, double tol = 1e-6);

}  // namespace ucs
