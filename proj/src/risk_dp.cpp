#include "marsgames/risk_dp.hpp"

#include <cmath>

#include "marsgames/errors.hpp"

namespace marsgames {

ExpValueTable::ExpValueTable(int agent_, double beta_, int horizon_,
                             int num_states_)
    : agent(agent_),
      beta(beta_),
      horizon(horizon_),
      num_states(num_states_),
      values(static_cast<size_t>(horizon_ + 1) * num_states_, 1.0) {}

double to_value(const ExpValueTable& table, int h, int s) {
  if (h < 0 || h > table.horizon || s < 0 || s >= table.num_states) {
    throw IndexError("value table index out of range");
  }
  const double e = table.at(h, s);
  const double edge = std::exp(table.beta * (table.horizon - h));
  const double lo = std::min(1.0, edge), hi = std::max(1.0, edge);
  if (!(e >= lo * (1.0 - 1e-9) && e <= hi * (1.0 + 1e-9))) {
    throw DomainError("exponential value " + std::to_string(e) +
                      " outside its admissible range");
  }
  return std::log(e) / table.beta;
}

double initial_value(const MGSpec& spec, const ExpValueTable& table) {
  return to_value(table, 0, spec.initial_state);
}

namespace {

void check_inputs(const MGSpec& spec, const JointPolicy& policy, int m) {
  if (m < 0 || m >= spec.num_agents()) throw IndexError("agent out of range");
  if (policy.horizon != spec.horizon || policy.num_states != spec.num_states ||
      policy.space.sizes() != spec.action_sizes) {
    throw ValidationError("policy shape does not match the game");
  }
}

// e^{beta r_h(s,a)} * sum_{s'} P_h(s'|s,a) next(s').
double backup(const MGSpec& spec, const ExpValueTable& table, int h, int s,
              int a) {
  const auto row = spec.transition_row(h, s, a);
  double expect = 0.0;
  for (int s2 = 0; s2 < spec.num_states; ++s2) {
    if (row[s2] != 0.0) expect += row[s2] * table.at(h + 1, s2);
  }
  return std::exp(table.beta * spec.reward(h, table.agent, s, a)) * expect;
}

// Maximizing V means maximizing E when beta > 0 and minimizing it otherwise.
bool improves(double beta, double candidate, double incumbent) {
  return beta > 0 ? candidate > incumbent : candidate < incumbent;
}

}  // namespace

ExpValueTable eval_policy(const MGSpec& spec, const JointPolicy& policy, int m) {
  check_inputs(spec, policy, m);
  ExpValueTable table(m, spec.betas[m], spec.horizon, spec.num_states);
  for (int h = spec.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < spec.num_states; ++s) {
      const auto pi = policy.at(h, s);
      double total = 0.0;
      for (int a = 0; a < spec.joint_actions(); ++a) {
        if (pi[a] != 0.0) total += pi[a] * backup(spec, table, h, s, a);
      }
      table.at(h, s) = total;
    }
  }
  return table;
}

BestResponseResult best_response(const MGSpec& spec, const JointPolicy& policy,
                                 int m) {
  check_inputs(spec, policy, m);
  const auto& space = spec.space();
  BestResponseResult out;
  out.table = ExpValueTable(m, spec.betas[m], spec.horizon, spec.num_states);
  out.actions.assign(static_cast<size_t>(spec.horizon) * spec.num_states, 0);
  for (int h = spec.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < spec.num_states; ++s) {
      const auto others = marginal_of_others(policy, h, s, m);
      double best = 0.0;
      int best_action = -1;
      for (int b = 0; b < space.size(m); ++b) {
        double value = 0.0;
        for (int o = 0; o < space.others_size(m); ++o) {
          if (others[o] == 0.0) continue;
          value += others[o] * backup(spec, out.table, h, s, space.combine(m, b, o));
        }
        if (best_action < 0 || improves(out.table.beta, value, best)) {
          best = value;
          best_action = b;
        }
      }
      out.table.at(h, s) = best;
      out.actions[h * spec.num_states + s] = best_action;
    }
  }
  return out;
}

BestModificationResult best_modification(const MGSpec& spec,
                                         const JointPolicy& policy, int m) {
  check_inputs(spec, policy, m);
  const auto& space = spec.space();
  const int own = space.size(m);
  BestModificationResult out;
  out.own_actions = own;
  out.table = ExpValueTable(m, spec.betas[m], spec.horizon, spec.num_states);
  out.modification.resize(static_cast<size_t>(spec.horizon) * spec.num_states * own);
  for (int h = spec.horizon - 1; h >= 0; --h) {
    for (int s = 0; s < spec.num_states; ++s) {
      const auto pi = policy.at(h, s);
      double total = 0.0;
      for (int rec = 0; rec < own; ++rec) {
        int& target = out.modification[(h * spec.num_states + s) * own + rec];
        double mass = 0.0;
        for (int o = 0; o < space.others_size(m); ++o) {
          mass += pi[space.combine(m, rec, o)];
        }
        if (mass <= 0.0) {
          target = rec;
          continue;
        }
        double best = 0.0;
        int best_action = -1;
        for (int b = 0; b < own; ++b) {
          double value = 0.0;
          for (int o = 0; o < space.others_size(m); ++o) {
            const double p = pi[space.combine(m, rec, o)];
            if (p == 0.0) continue;
            value += p * backup(spec, out.table, h, s, space.combine(m, b, o));
          }
          if (best_action < 0 || improves(out.table.beta, value, best)) {
            best = value;
            best_action = b;
          }
        }
        target = best_action;
        total += best;
      }
      out.table.at(h, s) = total;
    }
  }
  return out;
}

}  // namespace marsgames
