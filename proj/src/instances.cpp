#include "marsgames/instances.hpp"

#include <cmath>

#include "marsgames/errors.hpp"
#include "marsgames/regret_eval.hpp"

namespace marsgames {

InstanceDescriptor bias_instance(const std::vector<double>& betas, int horizon,
                                 int episodes) {
  if (betas.empty()) throw ParameterError("bias instance needs at least one agent");
  if (horizon < 1 || episodes < 1) throw ParameterError("H and K must be positive");
  for (double b : betas) {
    if (b == 0.0) throw ParameterError("betas must be nonzero");
  }
  const int star = most_risk_sensitive_agent(betas);
  const double factor = phi(horizon, betas[star]);
  const double reward = factor / std::sqrt(static_cast<double>(episodes));
  if (reward > 1.0) {
    throw ParameterError("bias instance reward " + std::to_string(reward) +
                         " exceeds 1; K must be at least phi_H(beta_*)^2 = " +
                         std::to_string(factor * factor));
  }
  const int M = static_cast<int>(betas.size());
  MGSpec spec(horizon, 1, std::vector<int>(M, 2), betas, 0);
  const auto& space = spec.space();
  for (int h = 0; h < horizon; ++h) {
    for (int a = 0; a < space.joint_size(); ++a) {
      spec.transition(h, 0, a, 0) = 1.0;
      for (int m = 0; m < M; ++m) {
        spec.reward(h, m, 0, a) = space.own_action(a, m) == 0 ? reward : 0.0;
      }
    }
  }
  InstanceDescriptor out;
  out.kind = "bias";
  out.params = json{{"kind", "bias"}, {"M", betas.size()}, {"betas", betas},
                    {"H", horizon},   {"K", episodes}};
  JointPolicy biased(horizon, 1, space, true);
  std::vector<int> profile(M, 1);
  profile[star] = 0;
  const int joint = space.encode(profile);
  for (int h = 0; h < horizon; ++h) biased.at(h, 0)[joint] = 1.0;
  out.fixture_policy = std::move(biased);
  out.spec = std::move(spec);
  return out;
}

std::string to_string(LowerBoundRegime regime) {
  return regime == LowerBoundRegime::kExp ? "exp" : "inv_h";
}

LowerBoundRegime parse_regime(const std::string& text) {
  if (text == "exp") return LowerBoundRegime::kExp;
  if (text == "inv_h") return LowerBoundRegime::kInvH;
  throw ParseError("unknown regime '" + text + "' (expected exp or inv_h)");
}

ArmProbabilities lower_bound_probabilities(double beta_star, int horizon,
                                           int episodes, LowerBoundRegime regime) {
  if (beta_star == 0.0) throw ParameterError("beta_star must be nonzero");
  const double scaled = std::abs(beta_star) * (horizon - 1);
  ArmProbabilities out;
  if (regime == LowerBoundRegime::kExp) {
    if (horizon < 2 || scaled < std::log(4.0)) {
      throw ParameterError("regime exp requires H >= 2 and |beta_*|(H-1) >= log 4");
    }
    out.p2 = std::exp(-scaled);
  } else {
    if (horizon <= 8 || scaled > std::log(static_cast<double>(horizon))) {
      throw ParameterError("regime inv_h requires H > 8 and |beta_*|(H-1) <= log H");
    }
    out.p2 = 1.0 / horizon;
  }
  if (episodes < 16.0 / out.p2) {
    throw ParameterError("K must be at least 16/p2 = " + std::to_string(16.0 / out.p2));
  }
  out.p_bar = std::sqrt(out.p2 * (1.0 - out.p2) / episodes);
  const double sign = beta_star > 0 ? 1.0 : -1.0;
  out.p1 = out.p2 + sign * out.p_bar;
  out.q1 = out.p1;
  out.q2 = out.p2 + 2.0 * sign * out.p_bar;
  return out;
}

InstanceDescriptor lower_bound_mg(double beta_star, int horizon, int episodes,
                                  int machine, LowerBoundRegime regime,
                                  const std::vector<double>& other_betas) {
  if (machine != 1 && machine != 2) throw ParameterError("machine must be 1 or 2");
  for (double b : other_betas) {
    if (b == 0.0 || std::abs(b) > std::abs(beta_star)) {
      throw ParameterError("other betas must be nonzero and no larger than |beta_star|");
    }
  }
  const auto arms = lower_bound_probabilities(beta_star, horizon, episodes, regime);
  const double arm1 = machine == 1 ? arms.p1 : arms.q1;
  const double arm2 = machine == 1 ? arms.p2 : arms.q2;
  // The arm pays H-1 with probability p for beta_* > 0 and 1-p otherwise.
  auto success = [beta_star](double p) { return beta_star > 0 ? p : 1.0 - p; };

  std::vector<double> betas{beta_star};
  betas.insert(betas.end(), other_betas.begin(), other_betas.end());
  const int M = static_cast<int>(betas.size());
  constexpr int kStart = 0, kGood = 1, kBad = 2;
  MGSpec spec(horizon, 3, std::vector<int>(M, 2), betas, kStart);
  const auto& space = spec.space();
  for (int h = 0; h < horizon; ++h) {
    for (int a = 0; a < space.joint_size(); ++a) {
      for (int s = 0; s < 3; ++s) {
        if (h == 0 && s == kStart) {
          const double p = success(space.own_action(a, 0) == 0 ? arm1 : arm2);
          spec.transition(h, s, a, kGood) = p;
          spec.transition(h, s, a, kBad) = 1.0 - p;
        } else {
          spec.transition(h, s, a, s) = 1.0;
        }
      }
      spec.reward(h, 0, kGood, a) = 1.0;
      for (int m = 1; m < M; ++m) {
        spec.reward(h, m, kGood, a) = 1.0;
        spec.reward(h, m, kBad, a) = 1.0;
      }
    }
  }
  InstanceDescriptor out;
  out.kind = "lower_bound";
  out.params = json{{"kind", "lower_bound"}, {"beta_star", beta_star},
                    {"H", horizon},          {"K", episodes},
                    {"machine", machine},    {"regime", to_string(regime)},
                    {"other_betas", other_betas},
                    {"arms", {{"p1", arms.p1}, {"p2", arms.p2}, {"q1", arms.q1},
                              {"q2", arms.q2}, {"p_bar", arms.p_bar}}}};
  out.spec = std::move(spec);
  return out;
}

InstanceDescriptor random_mg(uint64_t seed, int num_states, int horizon,
                             const std::vector<int>& action_sizes,
                             const std::vector<double>& betas, double sparsity) {
  if (num_states < 1 || horizon < 1 || action_sizes.empty()) {
    throw ParameterError("random game sizes must be positive");
  }
  if (betas.size() != action_sizes.size()) {
    throw ParameterError("need one beta per agent");
  }
  if (!(sparsity >= 0.0 && sparsity < 1.0)) {
    throw ParameterError("sparsity must lie in [0, 1)");
  }
  MGSpec spec(horizon, num_states, action_sizes, betas, 0);
  Rng rng(seed);
  const int A = spec.joint_actions(), M = spec.num_agents();
  std::vector<double> weights(num_states);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      for (int a = 0; a < A; ++a) {
        for (double& w : weights) w = 1.0 - rng.uniform();  // (0, 1]
        int keep = 0;
        for (int s2 = 1; s2 < num_states; ++s2) {
          if (weights[s2] > weights[keep]) keep = s2;
        }
        for (int s2 = 0; s2 < num_states; ++s2) {
          const bool drop = rng.uniform() < sparsity;
          if (drop && s2 != keep) weights[s2] = 0.0;
        }
        double total = 0.0;
        for (double w : weights) total += w;
        for (int s2 = 0; s2 < num_states; ++s2) {
          spec.transition(h, s, a, s2) = weights[s2] / total;
        }
        for (int m = 0; m < M; ++m) spec.reward(h, m, s, a) = rng.uniform();
      }
    }
  }
  require_valid(spec);
  InstanceDescriptor out;
  out.kind = "random";
  out.params = json{{"kind", "random"},
                    {"seed", seed},
                    {"S", num_states},
                    {"H", horizon},
                    {"action_sizes", action_sizes},
                    {"betas", betas},
                    {"sparsity", sparsity}};
  out.spec = std::move(spec);
  return out;
}

namespace {

template <typename T>
T param(const json& params, const char* key) {
  if (!params.contains(key)) {
    throw ParseError(std::string("instance parameter '") + key + "' is missing");
  }
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("instance parameter '") + key + "': " + e.what());
  }
}

template <typename T>
T param_or(const json& params, const char* key, T fallback) {
  return params.contains(key) ? param<T>(params, key) : fallback;
}

void reject_unknown(const json& params, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParseError("unknown instance parameter '" + key + "'");
  }
}

}  // namespace

InstanceDescriptor make_instance(const json& params) {
  if (!params.is_object()) throw ParseError("instance must be an object");
  const auto kind = param<std::string>(params, "kind");
  if (kind == "bias") {
    reject_unknown(params, {"kind", "M", "betas", "H", "K"});
    const auto betas = param<std::vector<double>>(params, "betas");
    if (params.contains("M") && param<int>(params, "M") != static_cast<int>(betas.size())) {
      throw ParameterError("bias instance: M does not match the number of betas");
    }
    return bias_instance(betas, param<int>(params, "H"), param<int>(params, "K"));
  }
  if (kind == "lower_bound") {
    reject_unknown(params, {"kind", "beta_star", "H", "K", "machine", "regime",
                            "other_betas", "arms"});
    return lower_bound_mg(param<double>(params, "beta_star"), param<int>(params, "H"),
                          param<int>(params, "K"), param_or<int>(params, "machine", 1),
                          parse_regime(param_or<std::string>(params, "regime", "exp")),
                          param_or<std::vector<double>>(params, "other_betas", {}));
  }
  if (kind == "random") {
    reject_unknown(params, {"kind", "seed", "S", "H", "action_sizes", "betas", "sparsity"});
    return random_mg(param<uint64_t>(params, "seed"), param<int>(params, "S"),
                     param<int>(params, "H"),
                     param<std::vector<int>>(params, "action_sizes"),
                     param<std::vector<double>>(params, "betas"),
                     param_or<double>(params, "sparsity", 0.0));
  }
  throw ParseError("unknown instance kind '" + kind + "'");
}

json descriptor_to_json(const InstanceDescriptor& descriptor) {
  json out{{"kind", descriptor.kind}, {"params", descriptor.params}};
  if (descriptor.fixture_policy) {
    out["fixture_policy"] = policy_to_json(*descriptor.fixture_policy);
  }
  return out;
}

}  // namespace marsgames
