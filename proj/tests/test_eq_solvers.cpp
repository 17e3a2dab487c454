#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "marsgames/errors.hpp"
#include "marsgames/eq_solvers.hpp"
#include "oracles.hpp"

using namespace marsgames;

namespace {

GameMatrix bimatrix(const std::vector<double>& u0, const std::vector<double>& u1) {
  GameMatrix g({2, 2});
  g.payoffs = {u0, u1};
  return g;
}

GameMatrix random_game(std::vector<int> sizes, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GameMatrix g(sizes);
  for (auto& row : g.payoffs)
    for (double& x : row) x = u(rng);
  return g;
}

double welfare(const GameMatrix& g, const std::vector<double>& x) {
  double w = 0;
  for (const auto& row : g.payoffs)
    for (size_t a = 0; a < x.size(); ++a) w += x[a] * row[a];
  return w;
}

std::vector<int> pure_nash(const GameMatrix& g) {
  const auto& sizes = g.space.sizes();
  std::vector<int> out;
  for (int a = 0; a < g.space.joint_size(); ++a) {
    bool stable = true;
    for (int m = 0; m < g.num_agents() && stable; ++m)
      for (int b = 0; b < sizes[m] && stable; ++b)
        stable = g.payoffs[m][oracle::replace_digit(sizes, a, m, b)] <= g.payoffs[m][a];
    if (stable) out.push_back(a);
  }
  return out;
}

void require_distribution(const std::vector<double>& x) {
  double total = 0;
  for (double p : x) {
    REQUIRE(std::isfinite(p));
    REQUIRE(p >= 0.0);
    total += p;
  }
  REQUIRE(std::abs(total - 1.0) < 1e-10);
}

}  // namespace

TEST_CASE("kind names parse case-insensitively") {
  REQUIRE(parse_equilibrium_kind("CCE") == EquilibriumKind::kCCE);
  REQUIRE(parse_equilibrium_kind("ce") == EquilibriumKind::kCE);
  REQUIRE(parse_equilibrium_kind("Ne") == EquilibriumKind::kNE);
  REQUIRE(to_string(EquilibriumKind::kCE) == "ce");
  REQUIRE_THROWS_AS(parse_equilibrium_kind("nash"), ParseError);
}

TEST_CASE("dominant strategy games give a point mass") {
  // Action 0 strictly dominant for both.
  const auto g = bimatrix({3, 2, 1, 0}, {3, 1, 2, 0});
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    const auto eq = solve_equilibrium(g, kind);
    REQUIRE(eq.kind == kind);
    REQUIRE(std::abs(eq.probs[0] - 1.0) < 1e-10);
  }
}

TEST_CASE("matching pennies") {
  const auto g = bimatrix({1, -1, -1, 1}, {-1, 1, 1, -1});
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    const auto eq = solve_equilibrium(g, kind);
    require_distribution(eq.probs);
    const double row0 = eq.probs[0] + eq.probs[1];
    const double col0 = eq.probs[0] + eq.probs[2];
    REQUIRE(std::abs(row0 - 0.5) < 1e-8);
    REQUIRE(std::abs(col0 - 0.5) < 1e-8);
    double v0 = 0;
    for (int a = 0; a < 4; ++a) v0 += eq.probs[a] * g.payoffs[0][a];
    REQUIRE(std::abs(v0) < 1e-8);
    REQUIRE(std::abs(welfare(g, eq.probs)) < 1e-10);
  }
  const auto ne = solve_ne(g);
  for (double p : ne.probs) REQUIRE(std::abs(p - 0.25) < 1e-8);
}

TEST_CASE("single-agent game picks the argmax") {
  GameMatrix g({4});
  g.payoffs = {{0.1, 0.7, 0.3, 0.7}};
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    const auto eq = solve_equilibrium(g, kind);
    REQUIRE(std::abs(eq.probs[1] + eq.probs[3] - 1.0) < 1e-10);
  }
}

TEST_CASE("chicken: correlated equilibrium beats the best pure equilibrium") {
  // Action 0 = dare, 1 = chicken.
  const auto g = bimatrix({0, 7, 2, 6}, {0, 2, 7, 6});
  const auto ce = solve_ce(g);
  REQUIRE(oracle::ce_violation(g, ce.probs) <= 1e-8);
  REQUIRE(verify(g, ce.probs, EquilibriumKind::kCE) <= 1e-8);
  double best_pure = -INFINITY;
  for (int a : pure_nash(g)) best_pure = std::max(best_pure, g.payoffs[0][a] + g.payoffs[1][a]);
  REQUIRE(best_pure == 9.0);
  REQUIRE(welfare(g, ce.probs) >= best_pure - 1e-9);
  // Welfare optimum over the CE polytope: 1/2 on (chicken, chicken) and 1/4 on
  // each pure equilibrium. Mutual chicken alone (welfare 12) is not a CE.
  REQUIRE(std::abs(welfare(g, ce.probs) - 10.5) < 1e-9);
  REQUIRE(oracle::ce_violation(g, {0, 0, 0, 1}) > 0.9);
}

TEST_CASE("prisoner's dilemma") {
  // 0 = cooperate, 1 = defect.
  const auto g = bimatrix({3, 0, 5, 1}, {3, 5, 0, 1});
  const auto ne = solve_ne(g);
  REQUIRE(std::abs(ne.probs[3] - 1.0) < 1e-12);
  const std::vector<double> cooperate{1, 0, 0, 0};
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    REQUIRE(std::abs(verify(g, cooperate, kind) - 2.0) < 1e-12);
  }
}

TEST_CASE("constant game: everything is an equilibrium") {
  const auto g = bimatrix({0.4, 0.4, 0.4, 0.4}, {0.9, 0.9, 0.9, 0.9});
  const std::vector<double> uniform(4, 0.25);
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    REQUIRE(verify(g, uniform, kind) == 0.0);
  }
}

TEST_CASE("three-agent pure equilibrium found by search") {
  GameMatrix g({2, 2, 2});
  // Every agent gets 1 when all play 0, otherwise 0.
  for (int m = 0; m < 3; ++m) {
    for (int a = 0; a < 8; ++a) g.payoffs[m][a] = a == 0 ? 1.0 : 0.0;
  }
  const auto ne = solve_ne(g);
  REQUIRE(ne.probs[0] == 1.0);
  const auto pure = pure_nash(g);
  REQUIRE(std::find(pure.begin(), pure.end(), 0) != pure.end());
}

TEST_CASE("three-agent game without pure equilibrium is unsupported") {
  GameMatrix g({2, 2, 2});
  // Agents 0 and 1 play matching pennies; agent 2 is indifferent.
  for (int a = 0; a < 8; ++a) {
    const int x = oracle::digit(g.space.sizes(), a, 0);
    const int y = oracle::digit(g.space.sizes(), a, 1);
    g.payoffs[0][a] = x == y ? 1.0 : -1.0;
    g.payoffs[1][a] = x == y ? -1.0 : 1.0;
    g.payoffs[2][a] = 0.0;
  }
  REQUIRE(pure_nash(g).empty());
  try {
    solve_ne(g);
    FAIL("expected SolverFailure");
  } catch (const SolverFailure& e) {
    REQUIRE(e.reason() == SolverFailure::Reason::kUnsupported);
  }
}

TEST_CASE("random games: soundness, inclusion and independent verification") {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    const std::vector<int> sizes = seed % 3 == 0 ? std::vector<int>{2, 2, 2}
                                 : seed % 3 == 1 ? std::vector<int>{3, 2}
                                                 : std::vector<int>{2, 2};
    const auto g = random_game(sizes, seed);
    INFO("seed " << seed);
    const auto cce = solve_cce(g);
    const auto ce = solve_ce(g);
    require_distribution(cce.probs);
    require_distribution(ce.probs);
    REQUIRE(oracle::cce_violation(g, cce.probs) <= 1e-8);
    REQUIRE(std::abs(verify(g, cce.probs, EquilibriumKind::kCCE) -
                     oracle::cce_violation(g, cce.probs)) < 1e-12);
    REQUIRE(oracle::ce_violation(g, ce.probs) <= 1e-8);
    REQUIRE(oracle::cce_violation(g, ce.probs) <= 1e-8);
    REQUIRE(std::abs(verify(g, ce.probs, EquilibriumKind::kCE) - oracle::ce_violation(g, ce.probs)) <
            1e-12);
    // CCE is the larger set, so its welfare optimum is at least the CE one.
    REQUIRE(welfare(g, cce.probs) >= welfare(g, ce.probs) - 1e-9);
    for (int a : pure_nash(g)) {
      double w = 0;
      for (const auto& row : g.payoffs) w += row[a];
      REQUIRE(welfare(g, ce.probs) >= w - 1e-9);
    }
    if (sizes.size() == 2 || !pure_nash(g).empty()) {
      const auto ne = solve_ne(g);
      require_distribution(ne.probs);
      REQUIRE(factorization_error(g.space, ne.probs) <= 1e-8);
      REQUIRE(verify(g, ne.probs, EquilibriumKind::kNE) <= 1e-8);
      REQUIRE(oracle::ce_violation(g, ne.probs) <= 1e-8);
      REQUIRE(oracle::cce_violation(g, ne.probs) <= 1e-8);
    }
  }
}

TEST_CASE("violations scale with the payoffs") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = random_game({2, 3}, seed + 500);
    const auto ce = solve_ce(g);
    GameMatrix scaled = g;
    for (double& x : scaled.payoffs[0]) x *= 7.5;
    for (double& x : scaled.payoffs[1]) x *= 0.01;
    REQUIRE(verify(scaled, ce.probs, EquilibriumKind::kCE) <= 1e-8);
    std::vector<double> uniform(6, 1.0 / 6);
    GameMatrix both = g;
    for (auto& row : both.payoffs)
      for (double& x : row) x *= 3.0;
    REQUIRE(std::abs(verify(both, uniform, EquilibriumKind::kCCE) -
                     3.0 * verify(g, uniform, EquilibriumKind::kCCE)) < 1e-12);
  }
}

TEST_CASE("large signed exponential payoffs stay solvable") {
  // Magnitudes typical of stage games with |beta| H near the guard.
  for (uint64_t seed = 0; seed < 10; ++seed) {
    auto g = random_game({2, 2}, seed + 900);
    for (double& x : g.payoffs[0]) x = std::exp(12.0 * (x + 1.0));
    for (double& x : g.payoffs[1]) x = -std::exp(-6.0 * (x + 1.0));
    for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE}) {
      const auto eq = solve_equilibrium(g, kind);
      require_distribution(eq.probs);
      const double scale0 = std::exp(24.0);
      // Relative to each agent's payoff range.
      REQUIRE(oracle::cce_violation(g, eq.probs) <= 1e-8 * scale0);
    }
  }
}
