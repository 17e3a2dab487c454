#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marsgames/game_model.hpp"
#include "marsgames/io.hpp"

namespace marsgames {

struct InstanceDescriptor {
  std::string kind;  // "bias", "lower_bound", "random" or "file"
  json params;       // generator parameters, echoed verbatim
  MGSpec spec;
  // Named fixture policy, when the construction defines one.
  std::optional<JointPolicy> fixture_policy;
};

// Single-state game where every agent earns phi(H, beta_*)/sqrt(K) per step
// for action g (index 0) and nothing for b (index 1), regardless of the
// others. The fixture policy has the most risk-sensitive agent play g and
// everyone else play b. Requires K >= phi(H, beta_*)^2; throws
// ParameterError when the per-step reward would exceed 1.
InstanceDescriptor bias_instance(const std::vector<double>& betas, int horizon,
                                 int episodes);

enum class LowerBoundRegime { kExp, kInvH };

std::string to_string(LowerBoundRegime regime);
LowerBoundRegime parse_regime(const std::string& text);

struct ArmProbabilities {
  double p1 = 0, p2 = 0, q1 = 0, q2 = 0;
  double p_bar = 0;
};

// Arm parameters of the two hard bandit machines. Throws ParameterError
// when the regime's preconditions fail.
ArmProbabilities lower_bound_probabilities(double beta_star, int horizon,
                                           int episodes, LowerBoundRegime regime);

// Three-state game: dummy start s0 (index 0), rewarding absorbing s1 and
// empty absorbing s2. At step 1 the action of agent 0 (the most
// risk-sensitive agent, |beta_star| >= |other betas|) pulls an arm of the
// selected machine. Other agents earn 1 per step in s1 and s2.
InstanceDescriptor lower_bound_mg(double beta_star, int horizon, int episodes,
                                  int machine, LowerBoundRegime regime,
                                  const std::vector<double>& other_betas = {});

// Uniform rewards, transition rows from normalized uniform weights with a
// `sparsity` fraction of entries zeroed (each row keeps at least one).
InstanceDescriptor random_mg(uint64_t seed, int num_states, int horizon,
                             const std::vector<int>& action_sizes,
                             const std::vector<double>& betas,
                             double sparsity = 0.0);

// Builds a descriptor from generator parameters {"kind": ..., ...}.
InstanceDescriptor make_instance(const json& params);

json descriptor_to_json(const InstanceDescriptor& descriptor);

}  // namespace marsgames
