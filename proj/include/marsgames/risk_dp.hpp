#pragma once

#include <vector>

#include "marsgames/game_model.hpp"

namespace marsgames {

// Exponential-domain value table E_h(s) = E[exp(beta * sum_{i>=h} r_i) | s_h = s]
// for one agent. Rows run h = 0..H, with row H the terminal row (all ones).
struct ExpValueTable {
  int agent = 0;
  double beta = 0.0;
  int horizon = 0;
  int num_states = 0;
  std::vector<double> values;  // [h*S + s]

  ExpValueTable() = default;
  ExpValueTable(int agent, double beta, int horizon, int num_states);

  double& at(int h, int s) { return values[static_cast<size_t>(h) * num_states + s]; }
  double at(int h, int s) const {
    return values[static_cast<size_t>(h) * num_states + s];
  }
};

struct BestResponseResult {
  ExpValueTable table;
  std::vector<int> actions;  // greedy own action, [h*S + s]

  int action(int h, int s) const { return actions[h * table.num_states + s]; }
};

struct BestModificationResult {
  ExpValueTable table;
  std::vector<int> modification;  // [(h*S + s)*A_m + a_m] -> played action

  int own_actions = 0;
  int remap(int h, int s, int a_m) const {
    return modification[(h * table.num_states + s) * own_actions + a_m];
  }
};

// Log-domain value (1/beta) log E_h(s). Throws DomainError when the entry
// lies outside [min(1, e^{beta(H-h)}), max(1, e^{beta(H-h)})] by more than
// 1e-9 relative slack.
double to_value(const ExpValueTable& table, int h, int s);

// Value at the initial state in log domain.
double initial_value(const MGSpec& spec, const ExpValueTable& table);

ExpValueTable eval_policy(const MGSpec& spec, const JointPolicy& policy, int m);

// Agent m deviates to its best Markov policy while the others play the
// per-state marginal of the joint policy.
BestResponseResult best_response(const MGSpec& spec, const JointPolicy& policy,
                                 int m);

// Agent m applies the best per-(h,s) remapping of its recommended action.
// Zero-probability recommendations map to themselves.
BestModificationResult best_modification(const MGSpec& spec,
                                         const JointPolicy& policy, int m);

}  // namespace marsgames
