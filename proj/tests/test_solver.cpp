#include <doctest.h>

#include <random>

#include "ucs/lp.hpp"

using namespace ucs;

namespace {

// Brute-force MILP reference: enumerate every binary assignment and take the
// best LP over the continuous remainder.
SolveOutcome enumerate_milp(const LinearProgram& lp) {
  std::vector<int> bins;
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.binary[j]) bins.push_back(j);
  SolveOutcome best;
  best.status = SolveStatus::Infeasible;
  const int k = static_cast<int>(bins.size());
  for (int mask = 0; mask < (1 << k); ++mask) {
    LinearProgram sub = lp;
    for (int i = 0; i < k; ++i) {
      double v = (mask >> i) & 1 ? 1.0 : 0.0;
      sub.lower[bins[i]] = v;
      sub.upper[bins[i]] = v;
      sub.binary[bins[i]] = 0;
    }
    auto out = solve_lp(sub);
    if (out.status != SolveStatus::Optimal) continue;
    bool better = best.status != SolveStatus::Optimal ||
                  (lp.sense == Sense::Minimize ? out.objective < best.objective
                                               : out.objective > best.objective);
    if (better) best = out;
  }
  return best;
}

LinearProgram random_milp(std::mt19937_64& rng, int n_cont, int n_bin, int n_rows) {
  std::uniform_real_distribution<double> c(-10.0, 10.0);
  std::uniform_real_distribution<double> a(-5.0, 5.0);
  std::uniform_real_distribution<double> ub(1.0, 20.0);
  std::uniform_int_distribution<int> rel(0, 2);
  LinearProgram lp;
  lp.sense = rng() % 2 ? Sense::Minimize : Sense::Maximize;
  for (int j = 0; j < n_cont; ++j) lp.add_variable(0.0, ub(rng), c(rng));
  for (int j = 0; j < n_bin; ++j) lp.add_variable(0.0, 1.0, c(rng), true);
  for (int r = 0; r < n_rows; ++r) {
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < lp.num_vars(); ++j)
      if (rng() % 3 != 0) coeffs.emplace_back(j, a(rng));
    if (coeffs.empty()) coeffs.emplace_back(0, 1.0);
    // rhs biased upward so a fair share of instances is feasible
    lp.add_row(std::move(coeffs), static_cast<Relation>(rel(rng)),
               std::uniform_real_distribution<double>(-5.0, 30.0)(rng));
  }
  return lp;
}

}  // namespace

TEST_CASE("lp: two variables, one coupling row") {
  LinearProgram lp;
  lp.sense = Sense::Minimize;
  int x = lp.add_variable(0.0, 6.0, -2.0);
  int y = lp.add_variable(0.0, 7.0, -1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::Le, 10.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-16.0).epsilon(1e-9));
  CHECK(out.primal[x] == doctest::Approx(6.0));
  CHECK(out.primal[y] == doctest::Approx(4.0));
}

TEST_CASE("lp: maximize sense") {
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  int x = lp.add_variable(0.0, kInf, 3.0);
  int y = lp.add_variable(0.0, kInf, 5.0);
  lp.add_row({{x, 1.0}, {y, 2.0}}, Relation::Le, 14.0);
  lp.add_row({{x, 3.0}, {y, -1.0}}, Relation::Ge, 0.0);
  lp.add_row({{x, 1.0}, {y, -1.0}}, Relation::Le, 2.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(38.0));
  CHECK(out.primal[x] == doctest::Approx(6.0));
  CHECK(out.primal[y] == doctest::Approx(4.0));
}

TEST_CASE("lp: equality rows and negative lower bounds") {
  LinearProgram lp;
  int x = lp.add_variable(-10.0, 10.0, 1.0);
  int y = lp.add_variable(-10.0, 10.0, 2.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::Eq, 4.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  // push the cheap variable up, the expensive one down
  CHECK(out.primal[x] == doctest::Approx(10.0));
  CHECK(out.primal[y] == doctest::Approx(-6.0));
  CHECK(out.objective == doctest::Approx(-2.0));
}

TEST_CASE("lp: fixed variables substitute into the rows") {
  LinearProgram lp;
  int x = lp.add_variable(3.0, 3.0, 2.0);
  int y = lp.add_variable(0.0, kInf, 1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::Ge, 8.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.primal[x] == doctest::Approx(3.0));
  CHECK(out.primal[y] == doctest::Approx(5.0));
  CHECK(out.objective == doctest::Approx(11.0));
}

TEST_CASE("lp: infeasible box and infeasible rows") {
  LinearProgram lp;
  int x = lp.add_variable(5.0, 3.0, 1.0);
  (void)x;
  CHECK(solve_lp(lp).status == SolveStatus::Infeasible);

  LinearProgram lp2;
  int y = lp2.add_variable(0.0, 10.0, 1.0);
  lp2.add_row({{y, 1.0}}, Relation::Ge, 5.0);
  lp2.add_row({{y, 1.0}}, Relation::Le, 3.0);
  CHECK(solve_lp(lp2).status == SolveStatus::Infeasible);
}

TEST_CASE("lp: unbounded detection") {
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  int x = lp.add_variable(0.0, kInf, 1.0);
  int y = lp.add_variable(0.0, kInf, 0.0);
  lp.add_row({{x, 1.0}, {y, -1.0}}, Relation::Le, 1.0);
  CHECK(solve_lp(lp).status == SolveStatus::Unbounded);
}

TEST_CASE("lp: redundant equality rows are tolerated") {
  LinearProgram lp;
  int x = lp.add_variable(0.0, kInf, 1.0);
  int y = lp.add_variable(0.0, kInf, 1.0);
  lp.add_row({{x, 1.0}, {y, 1.0}}, Relation::Eq, 6.0);
  lp.add_row({{x, 2.0}, {y, 2.0}}, Relation::Eq, 12.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(6.0));
}

TEST_CASE("lp: strong duality on random standard-form programs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cdist(0.1, 10.0);
  std::uniform_real_distribution<double> adist(0.0, 4.0);
  std::uniform_real_distribution<double> bdist(1.0, 20.0);
  for (int trial = 0; trial < 40; ++trial) {
    int nv = 2 + static_cast<int>(rng() % 5);
    int nr = 1 + static_cast<int>(rng() % 4);
    LinearProgram lp;
    for (int j = 0; j < nv; ++j) lp.add_variable(0.0, kInf, cdist(rng));
    std::vector<double> rhs;
    for (int r = 0; r < nr; ++r) {
      std::vector<std::pair<int, double>> coeffs;
      for (int j = 0; j < nv; ++j) coeffs.emplace_back(j, adist(rng));
      coeffs[rng() % nv].second += 0.5;  // keep each row satisfiable
      rhs.push_back(bdist(rng));
      lp.add_row(std::move(coeffs), Relation::Ge, rhs.back());
    }
    auto out = solve_lp(lp);
    REQUIRE(out.status == SolveStatus::Optimal);
    REQUIRE(out.has_duals);
    double dual_obj = 0.0;
    for (int r = 0; r < nr; ++r) {
      CHECK(out.duals[r] >= -1e-7);  // Ge rows in a min program
      dual_obj += out.duals[r] * rhs[r];
    }
    CHECK(dual_obj == doctest::Approx(out.objective).epsilon(1e-6));
  }
}

TEST_CASE("lp: duals flip sign with the optimization sense") {
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  int x = lp.add_variable(0.0, kInf, 4.0);
  lp.add_row({{x, 2.0}}, Relation::Le, 10.0);
  auto out = solve_lp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(20.0));
  // relaxing the row by one unit gains 2
  CHECK(out.duals[0] == doctest::Approx(2.0));
}

TEST_CASE("milp: pure binary knapsack") {
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  double value[] = {6.0, 10.0, 12.0};
  double weight[] = {1.0, 2.0, 3.0};
  std::vector<std::pair<int, double>> row;
  for (int j = 0; j < 3; ++j)
    row.emplace_back(lp.add_variable(0.0, 1.0, value[j], true), weight[j]);
  lp.add_row(std::move(row), Relation::Le, 5.0);
  auto out = solve_milp(lp);
  REQUIRE(out.status == SolveStatus::Optimal);
  CHECK(out.objective == doctest::Approx(22.0));
  CHECK(out.primal[0] == doctest::Approx(0.0));
  CHECK(out.primal[1] == doctest::Approx(1.0));
  CHECK(out.primal[2] == doctest::Approx(1.0));
}

TEST_CASE("milp: agrees with exhaustive enumeration on random instances") {
  std::mt19937_64 rng(42);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto lp = random_milp(rng, 1 + static_cast<int>(rng() % 3),
                          1 + static_cast<int>(rng() % 6),
                          1 + static_cast<int>(rng() % 4));
    auto ref = enumerate_milp(lp);
    auto out = solve_milp(lp);
    REQUIRE(out.status == ref.status);
    if (ref.status == SolveStatus::Optimal) {
      ++solved;
      CHECK(out.objective ==
            doctest::Approx(ref.objective).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK(solved > 20);  // the generator must not be degenerate
}

TEST_CASE("milp: relaxation bounds the integer optimum") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto lp = random_milp(rng, 2, 4, 3);
    auto out = solve_milp(lp);
    if (out.status != SolveStatus::Optimal) continue;
    LinearProgram relax = lp;
    std::fill(relax.binary.begin(), relax.binary.end(), 0);
    auto rel = solve_lp(relax);
    REQUIRE(rel.status == SolveStatus::Optimal);
    if (lp.sense == Sense::Minimize)
      CHECK(rel.objective <= out.objective + 1e-6);
    else
      CHECK(rel.objective >= out.objective - 1e-6);
  }
}

TEST_CASE("milp: all binaries fixed reduces to the plain lp") {
  std::mt19937_64 rng(5);
  auto lp = random_milp(rng, 2, 3, 3);
  for (int j = 0; j < lp.num_vars(); ++j)
    if (lp.binary[j]) {
      double v = rng() % 2 ? 1.0 : 0.0;
      lp.lower[j] = v;
      lp.upper[j] = v;
    }
  auto mip = solve_milp(lp);
  LinearProgram as_lp = lp;
  std::fill(as_lp.binary.begin(), as_lp.binary.end(), 0);
  auto ref = solve_lp(as_lp);
  REQUIRE(mip.status == ref.status);
  if (ref.status == SolveStatus::Optimal)
    CHECK(mip.objective == doctest::Approx(ref.objective).epsilon(1e-9));
}

TEST_CASE("milp: deterministic across repeated solves") {
  std::mt19937_64 rng(1234);
  auto lp = random_milp(rng, 3, 5, 4);
  auto a = solve_milp(lp);
  auto b = solve_milp(lp);
  REQUIRE(a.status == b.status);
  if (a.status == SolveStatus::Optimal) {
    CHECK(a.objective == b.objective);
    REQUIRE(a.primal.size() == b.primal.size());
    for (size_t j = 0; j < a.primal.size(); ++j) CHECK(a.primal[j] == b.primal[j]);
  }
}

TEST_CASE("milp: node budget is enforced") {
  // hard equality knapsack drives branching deep
  LinearProgram lp;
  lp.sense = Sense::Maximize;
  std::mt19937_64 rng(3);
  std::vector<std::pair<int, double>> row;
  for (int j = 0; j < 18; ++j) {
    double w = 1.0 + static_cast<double>(rng() % 97) / 7.0;
    row.emplace_back(lp.add_variable(0.0, 1.0, w + 0.01 * j, true), w);
  }
  lp.add_row(std::move(row), Relation::Le, 40.0);
  MilpOptions opts;
  opts.node_cap = 3;
  CHECK_THROWS_AS(solve_milp(lp, opts), NodeBudgetExceeded);
}

TEST_CASE("lp text dump mentions every row") {
  LinearProgram lp;
  int x = lp.add_variable(0.0, 1.0, 1.0);
  lp.add_row({{x, 1.0}}, Relation::Le, 0.5, "cap");
  auto text = lp.to_lp_text();
  CHECK(text.find("cap") != std::string::npos);
}
