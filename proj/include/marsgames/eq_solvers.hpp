#pragma once

#include <string>
#include <vector>

#include "marsgames/game_model.hpp"

namespace marsgames {

enum class EquilibriumKind { kNE, kCE, kCCE };

std::string to_string(EquilibriumKind kind);
// Accepts "ne", "ce", "cce" (any case). Throws ParseError otherwise.
EquilibriumKind parse_equilibrium_kind(const std::string& text);

// One-shot normal-form game. Every agent maximizes its payoff.
struct GameMatrix {
  JointActionSpace space;
  std::vector<std::vector<double>> payoffs;  // [m][joint action]

  GameMatrix() = default;
  explicit GameMatrix(std::vector<int> action_sizes);

  int num_agents() const { return space.num_agents(); }
  double& payoff(int m, int a) { return payoffs[m][a]; }
  double payoff(int m, int a) const { return payoffs[m][a]; }
};

struct EquilibriumDist {
  std::vector<double> probs;
  EquilibriumKind kind = EquilibriumKind::kCCE;
  double max_violation = 0.0;
};

// Largest incentive-constraint violation of x for the given kind:
//  CCE: max over (m, b) of the gain from always playing b;
//  CE:  max over m of the gain from the best recommendation remapping;
//  NE:  max over m of the best unilateral gain against the product of the
//       other agents' marginals of x.
double verify(const GameMatrix& game, const std::vector<double>& x,
              EquilibriumKind kind);

// Welfare-maximizing coarse correlated equilibrium via LP.
EquilibriumDist solve_cce(const GameMatrix& game);

// Welfare-maximizing correlated equilibrium via LP.
EquilibriumDist solve_ce(const GameMatrix& game);

// Pure NE by exhaustive search (welfare-maximal, lowest index on ties) for
// joint sizes up to 64; otherwise, for two agents with at most 8 actions
// each, mixed NE by support enumeration. Throws SolverFailure(kUnsupported)
// when neither applies.
EquilibriumDist solve_ne(const GameMatrix& game);

EquilibriumDist solve_equilibrium(const GameMatrix& game, EquilibriumKind kind);

}  // namespace marsgames
