#pragma once

#include <optional>

#include "ucs/costbound.hpp"
#include "ucs/demandset.hpp"
#include "ucs/uc.hpp"

namespace ucs {

struct ConfigMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LineSetMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One of the Table-style method identities: bn (box/singleton, no budget),
/// ub (+ cost budget), cc (hull), ubcc (hull + budget) — or any custom mix.
struct MethodConfig {
  std::string tag;
  DemandSet demand_set;
  std::optional<CostBoundModel> cost_bound;
  bool enforce_other_lines = true;

  std::string digest() const;
};

MethodConfig make_method(const std::string& tag, const DemandHistory& training,
                         const std::optional<CostBoundModel>& bound,
                         double kappa = 1.0);

struct ScreeningBound {
  int line = 0;
  Side side = Side::Upper;
  double extreme_flow = 0.0;
  double capacity = 0.0;
  bool removable = false;
  SolveStatus status = SolveStatus::Optimal;
};

struct ScreeningResult {
  std::vector<std::array<ScreeningBound, 2>> sides;  // [line][0]=lower, [1]=upper
  std::string method;
  std::string config_digest;
  std::string timestamp;

  int num_lines() const { return static_cast<int>(sides.size()); }
  const ScreeningBound& at(int line, Side s) const {
    return sides[line][s == Side::Lower ? 0 : 1];
  }
  int removable_count() const;
  int retained_count() const { return 2 * num_lines() - removable_count(); }
  double removable_fraction() const;
  ConstraintMask to_mask() const;

  static ScreeningResult from_json_file(const std::string& path);
  static ScreeningResult from_json_text(const std::string& text);
  std::string to_json_text() const;
};

/// Flow-extremizing relaxation for one (line, side) under the given method.
LinearProgram build_bounding_model(const Grid& grid, const PtdfMatrix& ptdf,
                                   int line, Side side,
                                   const MethodConfig& config);

ScreeningBound screen_line(const Grid& grid, const PtdfMatrix& ptdf, int line,
                           Side side, const MethodConfig& config,
                           const MilpOptions& opts = {});

ScreeningResult screen_all(const Grid& grid, const PtdfMatrix& ptdf,
                           const MethodConfig& config,
                           const MilpOptions& opts = {}, int n_threads = 0);

/// Removable only where removable in every input.
ScreeningResult intersect(const std::vector<ScreeningResult>& results);

// Removal keeps ties: an extreme exactly at capacity retains the side.
inline constexpr double kRemovalTolMw = 1e-6;

}  // namespace ucs
