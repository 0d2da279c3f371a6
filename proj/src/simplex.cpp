#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ucs/lp.hpp"

namespace ucs {

std::string LinearProgram::to_lp_text() const {
  std::ostringstream os;
  os << std::setprecision(12);
  os << (sense == Sense::Minimize ? "Minimize\n obj:" : "Maximize\n obj:");
  for (int j = 0; j < num_vars(); ++j)
    if (objective[j] != 0.0) os << " + " << objective[j] << " x" << j;
  os << "\nSubject To\n";
  int k = 0;
  for (const auto& row : rows) {
    os << " " << (row.name.empty() ? "c" + std::to_string(k) : row.name) << ":";
    for (auto [j, v] : row.coeffs) os << " + " << v << " x" << j;
    os << (row.rel == Relation::Le ? " <= " : row.rel == Relation::Ge ? " >= " : " = ");
    os << row.rhs << "\n";
    ++k;
  }
  os << "Bounds\n";
  for (int j = 0; j < num_vars(); ++j)
    os << " " << lower[j] << " <= x" << j << " <= " << upper[j] << "\n";
  os << "Binaries\n";
  for (int j = 0; j < num_vars(); ++j)
    if (binary[j]) os << " x" << j;
  os << "\nEnd\n";
  return os.str();
}

namespace {

// Mapping from a user variable to nonnegative standard-form column(s).
// Fixed variables are substituted out entirely.
struct VarMap {
  enum Kind { Shifted, Mirrored, Split, Fixed } kind;
  int col = -1;
  int col2 = -1;  // negative part for Split
  double offset = 0.0;
};

struct Tableau {
  int m = 0;
  int n = 0;
  std::vector<double> a;  // m rows x (n+1), last column is rhs
  std::vector<int> basis;
  std::vector<char> allowed;
  std::vector<double> cost;  // n+1, cost[n] = -objective value

  double& at(int i, int j) { return a[static_cast<size_t>(i) * (n + 1) + j]; }
  double get(int i, int j) const { return a[static_cast<size_t>(i) * (n + 1) + j]; }

  void pivot(int pr, int pc) {
    double piv = at(pr, pc);
    double inv = 1.0 / piv;
    for (int j = 0; j <= n; ++j) at(pr, j) *= inv;
    at(pr, pc) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (i == pr) continue;
      double f = at(i, pc);
      if (f == 0.0) continue;
      for (int j = 0; j <= n; ++j) at(i, j) -= f * at(pr, j);
      at(i, pc) = 0.0;
    }
    double f = cost[pc];
    if (f != 0.0) {
      for (int j = 0; j <= n; ++j) cost[j] -= f * at(pr, j);
      cost[pc] = 0.0;
    }
    basis[pr] = pc;
  }
};

enum class IterResult { Optimal, Unbounded };

IterResult run_simplex(Tableau& t, const SimplexOptions& opts) {
  const double tol = opts.tol_opt;
  int max_iters = opts.max_iters > 0 ? opts.max_iters
                                     : 20000 + 60 * (t.m + t.n);
  bool bland = false;
  int stall = 0;
  double last_obj = -t.cost[t.n];
  for (int iter = 0; iter < max_iters; ++iter) {
    // entering column
    int pc = -1;
    if (!bland) {
      double best = -tol;
      for (int j = 0; j < t.n; ++j) {
        if (!t.allowed[j]) continue;
        if (t.cost[j] < best) {
          best = t.cost[j];
          pc = j;
        }
      }
    } else {
      for (int j = 0; j < t.n; ++j) {
        if (!t.allowed[j]) continue;
        if (t.cost[j] < -tol) {
          pc = j;
          break;
        }
      }
    }
    if (pc < 0) return IterResult::Optimal;

    // ratio test in two passes: find the limiting ratio, then among
    // near-ties pick the largest pivot element. Pivoting on a near-zero
    // entry amplifies roundoff by its reciprocal and can silently corrupt
    // the tableau, so stability beats index order here; exact comparisons
    // keep runs deterministic.
    double best_ratio = kInf;
    for (int i = 0; i < t.m; ++i) {
      double aij = t.get(i, pc);
      if (aij > 1e-11) {
        double ratio = t.get(i, t.n) / aij;
        if (ratio < best_ratio) best_ratio = ratio;
      }
    }
    if (best_ratio == kInf) return IterResult::Unbounded;
    int pr = -1;
    double best_piv = 0.0;
    double tie = best_ratio + 1e-9 * (1.0 + std::abs(best_ratio));
    for (int i = 0; i < t.m; ++i) {
      double aij = t.get(i, pc);
      if (aij > 1e-11 && t.get(i, t.n) / aij <= tie) {
        if (aij > best_piv ||
            (aij == best_piv && pr >= 0 && t.basis[i] < t.basis[pr])) {
          best_piv = aij;
          pr = i;
        }
      }
    }
    t.pivot(pr, pc);

    double obj = -t.cost[t.n];
    if (obj > last_obj - 1e-12) {
      if (++stall > 60) bland = true;
    } else {
      stall = 0;
      bland = false;
    }
    last_obj = obj;
  }
  throw NumericalBreakdown("simplex iteration limit exceeded");
}

}  // namespace

SolveOutcome solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  if (lp.has_integers())
    throw std::invalid_argument("solve_lp: integer-marked variables present");
  const int nv = lp.num_vars();
  for (int j = 0; j < nv; ++j) {
    if (!(lp.lower[j] <= lp.upper[j]))
      return SolveOutcome{SolveStatus::Infeasible, 0.0, {}, {}, false};
    if (!std::isfinite(lp.objective[j]))
      throw std::invalid_argument("solve_lp: non-finite objective coefficient");
  }

  // Standard-form columns for every user variable.
  std::vector<VarMap> vmap(nv);
  int ncols = 0;
  int n_bound_rows = 0;
  for (int j = 0; j < nv; ++j) {
    double lo = lp.lower[j], up = lp.upper[j];
    if (lo == up) {
      vmap[j] = {VarMap::Fixed, -1, -1, lo};
    } else if (std::isfinite(lo)) {
      vmap[j] = {VarMap::Shifted, ncols++, -1, lo};
      if (std::isfinite(up)) ++n_bound_rows;
    } else if (std::isfinite(up)) {
      vmap[j] = {VarMap::Mirrored, ncols++, -1, up};
    } else {
      vmap[j] = {VarMap::Split, ncols, ncols + 1, 0.0};
      ncols += 2;
    }
  }
  const int n_struct = ncols;

  const double sign = lp.sense == Sense::Minimize ? 1.0 : -1.0;

  // Substituted user rows followed by upper-bound rows.
  struct StdRow {
    std::vector<double> coef;  // over structural columns
    Relation rel;
    double rhs;
    double flip = 1.0;  // sign applied to reach rhs >= 0
    int user_row = -1;
  };
  std::vector<StdRow> srows;
  srows.reserve(lp.rows.size() + n_bound_rows);
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    StdRow s;
    s.coef.assign(n_struct, 0.0);
    s.rel = row.rel;
    s.rhs = row.rhs;
    s.user_row = static_cast<int>(r);
    for (auto [j, v] : row.coeffs) {
      if (j < 0 || j >= nv) throw std::invalid_argument("row references unknown variable");
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite row coefficient");
      const auto& vm = vmap[j];
      switch (vm.kind) {
        case VarMap::Shifted:
          s.coef[vm.col] += v;
          s.rhs -= v * vm.offset;
          break;
        case VarMap::Mirrored:
          s.coef[vm.col] -= v;
          s.rhs -= v * vm.offset;
          break;
        case VarMap::Split:
          s.coef[vm.col] += v;
          s.coef[vm.col2] -= v;
          break;
        case VarMap::Fixed:
          s.rhs -= v * vm.offset;
          break;
      }
    }
    srows.push_back(std::move(s));
  }
  for (int j = 0; j < nv; ++j) {
    const auto& vm = vmap[j];
    if (vm.kind == VarMap::Shifted && std::isfinite(lp.upper[j])) {
      StdRow s;
      s.coef.assign(n_struct, 0.0);
      s.coef[vm.col] = 1.0;
      s.rel = Relation::Le;
      s.rhs = lp.upper[j] - lp.lower[j];
      srows.push_back(std::move(s));
    }
  }

  const int m = static_cast<int>(srows.size());

  // slack / surplus / artificial layout
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  int col = n_struct;
  for (int i = 0; i < m; ++i) {
    auto& s = srows[i];
    if (s.rhs < 0.0) {
      for (auto& c : s.coef) c = -c;
      s.rhs = -s.rhs;
      s.flip = -1.0;
      s.rel = s.rel == Relation::Le   ? Relation::Ge
              : s.rel == Relation::Ge ? Relation::Le
                                      : Relation::Eq;
    }
    if (s.rel != Relation::Eq) slack_col[i] = col++;
    if (s.rel != Relation::Le) art_col[i] = col++;
  }
  const int ntot = col;

  Tableau t;
  t.m = m;
  t.n = ntot;
  t.a.assign(static_cast<size_t>(m) * (ntot + 1), 0.0);
  t.basis.assign(m, -1);
  t.allowed.assign(ntot, 1);
  t.cost.assign(ntot + 1, 0.0);

  double bmax = 1.0;
  for (int i = 0; i < m; ++i) {
    const auto& s = srows[i];
    for (int j = 0; j < n_struct; ++j) t.at(i, j) = s.coef[j];
    if (slack_col[i] >= 0) t.at(i, slack_col[i]) = s.rel == Relation::Le ? 1.0 : -1.0;
    if (art_col[i] >= 0) t.at(i, art_col[i]) = 1.0;
    t.at(i, ntot) = s.rhs;
    bmax = std::max(bmax, std::abs(s.rhs));
    t.basis[i] = art_col[i] >= 0 ? art_col[i] : slack_col[i];
  }

  // phase 1: minimize sum of artificials
  std::vector<char> is_art(ntot, 0);
  for (int i = 0; i < m; ++i)
    if (art_col[i] >= 0) is_art[art_col[i]] = 1;
  bool need_phase1 = std::find(is_art.begin(), is_art.end(), 1) != is_art.end();
  if (need_phase1) {
    for (int j = 0; j <= ntot; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i)
        if (art_col[i] >= 0 && t.basis[i] == art_col[i]) s += t.get(i, j);
      t.cost[j] = (j < ntot && is_art[j] ? 1.0 : 0.0) - s;
    }
    if (run_simplex(t, opts) == IterResult::Unbounded)
      throw NumericalBreakdown("phase-1 unbounded");
    double infeas = -t.cost[ntot];
    if (infeas > opts.tol_feas * bmax)
      return SolveOutcome{SolveStatus::Infeasible, 0.0, {}, {}, false};
    // drive basic artificials out; a row with no eligible pivot is redundant
    for (int i = 0; i < m; ++i) {
      if (art_col[i] < 0 || t.basis[i] != art_col[i]) continue;
      int pc = -1;
      for (int j = 0; j < ntot; ++j) {
        if (is_art[j]) continue;
        if (std::abs(t.get(i, j)) > 1e-9) { pc = j; break; }
      }
      if (pc >= 0) t.pivot(i, pc);
      // else: redundant row, artificial stays basic at zero; its column is
      // barred below so it can never re-enter or grow
    }
    for (int j = 0; j < ntot; ++j)
      if (is_art[j]) t.allowed[j] = 0;
  }

  // phase 2 cost row from structural (min-sense) costs
  std::vector<double> c2(ntot, 0.0);
  for (int j = 0; j < nv; ++j) {
    const auto& vm = vmap[j];
    double cj = sign * lp.objective[j];
    switch (vm.kind) {
      case VarMap::Shifted:
      case VarMap::Mirrored:
        c2[vm.col] += vm.kind == VarMap::Shifted ? cj : -cj;
        break;
      case VarMap::Split:
        c2[vm.col] += cj;
        c2[vm.col2] -= cj;
        break;
      case VarMap::Fixed:
        break;  // constant term, folded in at extraction
    }
  }
  for (int j = 0; j <= ntot; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      int b = t.basis[i];
      if (b >= 0 && c2[b] != 0.0) s += c2[b] * t.get(i, j);
    }
    t.cost[j] = (j < ntot ? c2[j] : 0.0) - s;
  }

  if (run_simplex(t, opts) == IterResult::Unbounded)
    return SolveOutcome{SolveStatus::Unbounded, 0.0, {}, {}, false};

  // primal extraction
  std::vector<double> tval(ntot, 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[i] >= 0) tval[t.basis[i]] = t.get(i, ntot);
  std::vector<double> x(nv, 0.0);
  for (int j = 0; j < nv; ++j) {
    const auto& vm = vmap[j];
    switch (vm.kind) {
      case VarMap::Shifted: x[j] = vm.offset + tval[vm.col]; break;
      case VarMap::Mirrored: x[j] = vm.offset - tval[vm.col]; break;
      case VarMap::Split: x[j] = tval[vm.col] - tval[vm.col2]; break;
      case VarMap::Fixed: x[j] = vm.offset; break;
    }
  }
  double obj = 0.0;
  for (int j = 0; j < nv; ++j) obj += lp.objective[j] * x[j];

  // duals for user rows from the final reduced costs of their slack /
  // artificial columns
  std::vector<double> duals(lp.rows.size(), 0.0);
  for (int i = 0; i < m; ++i) {
    if (srows[i].user_row < 0) continue;
    double y;
    if (slack_col[i] >= 0) {
      double r = t.cost[slack_col[i]];
      y = srows[i].rel == Relation::Le ? -r : r;
    } else {
      y = -t.cost[art_col[i]];
    }
    duals[srows[i].user_row] = sign * srows[i].flip * y;
  }

  return SolveOutcome{SolveStatus::Optimal, obj, std::move(x), std::move(duals), true};
}

}  // namespace ucs
