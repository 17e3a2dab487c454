#include "marsgames/game_model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "marsgames/errors.hpp"

namespace marsgames {

JointActionSpace::JointActionSpace(std::vector<int> action_sizes)
    : sizes_(std::move(action_sizes)), strides_(sizes_.size(), 1) {
  joint_size_ = 1;
  for (int m = num_agents() - 1; m >= 0; --m) {
    if (sizes_[m] < 1) throw ParameterError("action set sizes must be >= 1");
    strides_[m] = joint_size_;
    joint_size_ *= sizes_[m];
  }
}

int JointActionSpace::encode(std::span<const int> actions) const {
  if (static_cast<int>(actions.size()) != num_agents()) {
    throw IndexError("joint action has wrong number of components");
  }
  int joint = 0;
  for (int m = 0; m < num_agents(); ++m) {
    if (actions[m] < 0 || actions[m] >= sizes_[m]) {
      throw IndexError("action out of range for agent " + std::to_string(m));
    }
    joint += actions[m] * strides_[m];
  }
  return joint;
}

std::vector<int> JointActionSpace::decode(int joint) const {
  std::vector<int> out(sizes_.size());
  for (int m = 0; m < num_agents(); ++m) out[m] = own_action(joint, m);
  return out;
}

int JointActionSpace::others_index(int joint, int m) const {
  // Digits above m keep their weight divided by |A_m|; digits below keep
  // their weight unchanged.
  const int high = joint / (strides_[m] * sizes_[m]);
  const int low = joint % strides_[m];
  return high * strides_[m] + low;
}

int JointActionSpace::combine(int m, int b, int others) const {
  const int high = others / strides_[m];
  const int low = others % strides_[m];
  return (high * sizes_[m] + b) * strides_[m] + low;
}

MGSpec::MGSpec(int horizon_, int num_states_, std::vector<int> action_sizes_,
               std::vector<double> betas_, int initial_state_)
    : horizon(horizon_),
      num_states(num_states_),
      action_sizes(std::move(action_sizes_)),
      betas(std::move(betas_)),
      initial_state(initial_state_),
      space_(action_sizes) {
  if (horizon < 1 || num_states < 1) {
    throw ParameterError("horizon and state count must be positive");
  }
  const size_t A = space_.joint_size();
  transitions.assign(static_cast<size_t>(horizon) * num_states * A * num_states,
                     0.0);
  rewards.assign(static_cast<size_t>(horizon) * num_agents() * num_states * A,
                 0.0);
}

std::vector<std::string> validate_spec(const MGSpec& spec) {
  std::vector<std::string> report;
  auto add = [&report](const std::string& msg) { report.push_back(msg); };

  if (spec.horizon < 1) add("horizon must be positive");
  if (spec.num_states < 1) add("state count must be positive");
  if (spec.action_sizes.empty()) add("at least one agent is required");
  for (size_t m = 0; m < spec.action_sizes.size(); ++m) {
    if (spec.action_sizes[m] < 1) {
      add("action set of agent " + std::to_string(m + 1) + " is empty");
    }
  }
  if (spec.betas.size() != spec.action_sizes.size()) {
    add("betas must have one entry per agent");
  }
  if (spec.initial_state < 0 || spec.initial_state >= spec.num_states) {
    add("initial_state out of range");
  }
  if (!report.empty()) return report;

  if (spec.space().sizes() != spec.action_sizes) {
    add("joint action space is stale; call refresh_space()");
    return report;
  }
  const int H = spec.horizon, S = spec.num_states, A = spec.joint_actions(),
            M = spec.num_agents();
  if (spec.transitions.size() != static_cast<size_t>(H) * S * A * S) {
    add("transitions table has wrong size");
  }
  if (spec.rewards.size() != static_cast<size_t>(H) * M * S * A) {
    add("rewards table has wrong size");
  }
  if (!report.empty()) return report;

  for (int m = 0; m < M; ++m) {
    const double beta = spec.betas[m];
    const std::string who = "agent " + std::to_string(m + 1);
    if (!std::isfinite(beta) || beta == 0.0) {
      add("beta must be nonzero (" + who + ")");
    } else if (std::abs(beta) * H > kMaxBetaHorizon) {
      add("|beta|*H exceeds " + std::to_string(kMaxBetaHorizon) + " (" + who +
          ")");
    }
  }
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double total = 0.0;
        bool negative = false;
        for (double p : spec.transition_row(h, s, a)) {
          if (!(p >= 0.0)) negative = true;
          total += p;
        }
        std::ostringstream where;
        where << "(h=" << h + 1 << ", s=" << s << ", a=" << a << ")";
        if (negative) add("negative or NaN transition probability at " + where.str());
        if (!(std::abs(total - 1.0) <= 1e-12)) {
          std::ostringstream msg;
          msg.precision(17);
          msg << "transition row at " << where.str() << " sums to " << total;
          add(msg.str());
        }
        for (int m = 0; m < M; ++m) {
          const double r = spec.reward(h, m, s, a);
          if (!(r >= 0.0 && r <= 1.0)) {
            std::ostringstream msg;
            msg << "reward of agent " << m + 1 << " at " << where.str()
                << " outside [0,1]: " << r;
            add(msg.str());
          }
        }
      }
    }
  }
  return report;
}

void require_valid(const MGSpec& spec) {
  const auto report = validate_spec(spec);
  if (report.empty()) return;
  std::string msg = "invalid Markov game:";
  for (const auto& line : report) msg += "\n  " + line;
  throw ValidationError(msg);
}

JointPolicy::JointPolicy(int horizon_, int num_states_, JointActionSpace space_,
                         bool is_product_)
    : horizon(horizon_),
      num_states(num_states_),
      space(std::move(space_)),
      dist(static_cast<size_t>(horizon_) * num_states_ * space.joint_size(), 0.0),
      is_product(is_product_) {}

JointPolicy JointPolicy::uniform(const MGSpec& spec) {
  JointPolicy policy(spec.horizon, spec.num_states, spec.space(), true);
  std::fill(policy.dist.begin(), policy.dist.end(),
            1.0 / spec.joint_actions());
  return policy;
}

std::vector<std::string> validate_policy(const MGSpec& spec,
                                         const JointPolicy& policy) {
  std::vector<std::string> report;
  if (policy.horizon != spec.horizon || policy.num_states != spec.num_states ||
      policy.space.sizes() != spec.action_sizes) {
    report.push_back("policy shape does not match the game");
    return report;
  }
  for (int h = 0; h < policy.horizon; ++h) {
    for (int s = 0; s < policy.num_states; ++s) {
      const auto row = policy.at(h, s);
      double total = 0.0;
      bool negative = false;
      for (double p : row) {
        if (!(p >= 0.0)) negative = true;
        total += p;
      }
      const std::string where =
          "(h=" + std::to_string(h + 1) + ", s=" + std::to_string(s) + ")";
      if (negative) report.push_back("negative probability at " + where);
      if (!(std::abs(total - 1.0) <= 1e-12)) {
        report.push_back("policy row at " + where + " does not sum to 1");
      }
      if (policy.is_product && factorization_error(policy.space, row) > 1e-10) {
        report.push_back("policy flagged as product does not factorize at " +
                         where);
      }
    }
  }
  return report;
}

namespace {

void check_index(const JointPolicy& policy, int h, int s, int m) {
  if (h < 0 || h >= policy.horizon || s < 0 || s >= policy.num_states || m < 0 ||
      m >= policy.space.num_agents()) {
    throw IndexError("policy index out of range");
  }
}

}  // namespace

std::vector<double> own_marginal(const JointPolicy& policy, int h, int s,
                                 int m) {
  check_index(policy, h, s, m);
  std::vector<double> out(policy.space.size(m), 0.0);
  const auto row = policy.at(h, s);
  for (int a = 0; a < policy.space.joint_size(); ++a) {
    out[policy.space.own_action(a, m)] += row[a];
  }
  return out;
}

std::vector<double> marginal_of_others(const JointPolicy& policy, int h, int s,
                                       int m) {
  check_index(policy, h, s, m);
  const auto& space = policy.space;
  std::vector<double> out(space.others_size(m), 0.0);
  const auto row = policy.at(h, s);
  for (int a = 0; a < space.joint_size(); ++a) {
    out[space.others_index(a, m)] += row[a];
  }
  return out;
}

std::vector<double> conditional_given_own(const JointPolicy& policy, int h,
                                          int s, int m, int own_action) {
  check_index(policy, h, s, m);
  const auto& space = policy.space;
  if (own_action < 0 || own_action >= space.size(m)) {
    throw IndexError("own action out of range");
  }
  const auto row = policy.at(h, s);
  std::vector<double> out(space.others_size(m), 0.0);
  double mass = 0.0;
  for (int o = 0; o < space.others_size(m); ++o) {
    out[o] = row[space.combine(m, own_action, o)];
    mass += out[o];
  }
  if (mass <= 0.0) {
    throw ZeroMarginal("recommendation " + std::to_string(own_action) +
                       " of agent " + std::to_string(m + 1) +
                       " has zero probability");
  }
  for (double& p : out) p /= mass;
  return out;
}

std::vector<double> product_of(
    const JointActionSpace& space,
    const std::vector<std::vector<double>>& marginals) {
  std::vector<double> out(space.joint_size(), 1.0);
  for (int a = 0; a < space.joint_size(); ++a) {
    for (int m = 0; m < space.num_agents(); ++m) {
      out[a] *= marginals[m][space.own_action(a, m)];
    }
  }
  return out;
}

double factorization_error(const JointActionSpace& space,
                           std::span<const double> dist) {
  std::vector<std::vector<double>> marginals(space.num_agents());
  for (int m = 0; m < space.num_agents(); ++m) {
    marginals[m].assign(space.size(m), 0.0);
    for (int a = 0; a < space.joint_size(); ++a) {
      marginals[m][space.own_action(a, m)] += dist[a];
    }
  }
  const auto prod = product_of(space, marginals);
  double err = 0.0;
  for (int a = 0; a < space.joint_size(); ++a) {
    err = std::max(err, std::abs(prod[a] - dist[a]));
  }
  return err;
}

int Rng::sample(std::span<const double> probs) {
  const double u = uniform();
  double cdf = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cdf += probs[i];
    last_positive = static_cast<int>(i);
    if (u < cdf) return last_positive;
  }
  // Rounding left the cumulative sum just below u.
  if (last_positive < 0) throw DomainError("cannot sample from a zero vector");
  return last_positive;
}

StepResult step(const MGSpec& spec, int h, int s, int a, Rng& rng) {
  if (h < 0 || h >= spec.horizon || s < 0 || s >= spec.num_states || a < 0 ||
      a >= spec.joint_actions()) {
    throw IndexError("step index out of range");
  }
  StepResult out;
  out.rewards.resize(spec.num_agents());
  for (int m = 0; m < spec.num_agents(); ++m) {
    out.rewards[m] = spec.reward(h, m, s, a);
  }
  out.next_state = rng.sample(spec.transition_row(h, s, a));
  return out;
}

}  // namespace marsgames
