#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace marsgames {

// Mixed-radix encoding of joint actions. Agent 0 is the most significant
// digit, so joint index a = sum_m a_m * stride(m).
class JointActionSpace {
 public:
  JointActionSpace() = default;
  explicit JointActionSpace(std::vector<int> action_sizes);

  int num_agents() const { return static_cast<int>(sizes_.size()); }
  int joint_size() const { return joint_size_; }
  int size(int m) const { return sizes_[m]; }
  int stride(int m) const { return strides_[m]; }
  const std::vector<int>& sizes() const { return sizes_; }

  // Number of joint actions of all agents except m.
  int others_size(int m) const { return joint_size_ / sizes_[m]; }

  int own_action(int joint, int m) const {
    return (joint / strides_[m]) % sizes_[m];
  }
  int encode(std::span<const int> actions) const;
  std::vector<int> decode(int joint) const;

  // Joint action with agent m's component replaced by b.
  int with_own(int joint, int m, int b) const {
    return joint + (b - own_action(joint, m)) * strides_[m];
  }
  // Index of the opponents' profile of `joint` in the space A_{-m}, which
  // uses the same mixed-radix ordering with digit m removed.
  int others_index(int joint, int m) const;
  // Inverse of others_index: combine own action b with opponents' index.
  int combine(int m, int b, int others) const;

 private:
  std::vector<int> sizes_;
  std::vector<int> strides_;
  int joint_size_ = 0;
};

// Tabular general-sum Markov game. Steps are 0-based internally
// (h = 0..H-1); the entropic-risk parameter of agent m is betas[m].
struct MGSpec {
  int horizon = 0;
  int num_states = 0;
  std::vector<int> action_sizes;
  std::vector<double> betas;
  int initial_state = 0;
  // transitions[((h*S + s)*A + a)*S + s']
  std::vector<double> transitions;
  // rewards[((h*M + m)*S + s)*A + a]
  std::vector<double> rewards;

  MGSpec() = default;
  // Allocates zero-filled tables of the right shape.
  MGSpec(int horizon, int num_states, std::vector<int> action_sizes,
         std::vector<double> betas, int initial_state = 0);

  int num_agents() const { return static_cast<int>(action_sizes.size()); }
  int joint_actions() const { return space_.joint_size(); }
  const JointActionSpace& space() const { return space_; }

  double& transition(int h, int s, int a, int s2) {
    return transitions[transition_offset(h, s, a) + s2];
  }
  double transition(int h, int s, int a, int s2) const {
    return transitions[transition_offset(h, s, a) + s2];
  }
  std::span<const double> transition_row(int h, int s, int a) const {
    return {transitions.data() + transition_offset(h, s, a),
            static_cast<size_t>(num_states)};
  }
  double& reward(int h, int m, int s, int a) {
    return rewards[reward_offset(h, m, s, a)];
  }
  double reward(int h, int m, int s, int a) const {
    return rewards[reward_offset(h, m, s, a)];
  }

  // Rebuilds the joint action space after action_sizes was edited in place.
  void refresh_space() { space_ = JointActionSpace(action_sizes); }

 private:
  size_t transition_offset(int h, int s, int a) const {
    return ((static_cast<size_t>(h) * num_states + s) * joint_actions() + a) *
           num_states;
  }
  size_t reward_offset(int h, int m, int s, int a) const {
    return ((static_cast<size_t>(h) * num_agents() + m) * num_states + s) *
               joint_actions() +
           a;
  }

  JointActionSpace space_;
};

// Largest |beta_m| * H accepted by validate_spec. Keeps e^{beta H} finite
// with headroom in double precision.
inline constexpr double kMaxBetaHorizon = 30.0;

// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_spec(const MGSpec& spec);

// Throws ValidationError carrying every violation when the report is nonempty.
void require_valid(const MGSpec& spec);

// Per-(h,s) distribution over joint actions.
struct JointPolicy {
  int horizon = 0;
  int num_states = 0;
  JointActionSpace space;
  std::vector<double> dist;  // [(h*S + s)*A + a]
  bool is_product = false;

  JointPolicy() = default;
  JointPolicy(int horizon, int num_states, JointActionSpace space,
              bool is_product = false);

  // Uniform over joint actions everywhere (a product policy).
  static JointPolicy uniform(const MGSpec& spec);

  std::span<double> at(int h, int s) {
    return {dist.data() + offset(h, s), static_cast<size_t>(space.joint_size())};
  }
  std::span<const double> at(int h, int s) const {
    return {dist.data() + offset(h, s), static_cast<size_t>(space.joint_size())};
  }

  bool operator==(const JointPolicy& other) const {
    return horizon == other.horizon && num_states == other.num_states &&
           space.sizes() == other.space.sizes() && dist == other.dist &&
           is_product == other.is_product;
  }

 private:
  size_t offset(int h, int s) const {
    return (static_cast<size_t>(h) * num_states + s) * space.joint_size();
  }
};

std::vector<std::string> validate_policy(const MGSpec& spec,
                                         const JointPolicy& policy);

// Marginal distribution of agent m's own action at (h,s).
std::vector<double> own_marginal(const JointPolicy& policy, int h, int s, int m);

// Sum over a_m of pi_h(a_m, a_{-m} | s), indexed by others_index.
std::vector<double> marginal_of_others(const JointPolicy& policy, int h, int s,
                                       int m);

// pi_h(a_{-m} | a_m, s). Throws ZeroMarginal when a_m has zero probability.
std::vector<double> conditional_given_own(const JointPolicy& policy, int h,
                                          int s, int m, int own_action);

// Product of per-agent marginals over the joint space.
std::vector<double> product_of(const JointActionSpace& space,
                               const std::vector<std::vector<double>>& marginals);

// Largest absolute difference between dist and the product of its marginals.
double factorization_error(const JointActionSpace& space,
                           std::span<const double> dist);

// Seeded generator. Draws are reproducible across platforms because the
// conversion to [0,1) does not go through std distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  uint64_t next() { return engine_(); }
  // Inverse-CDF draw from a probability vector.
  int sample(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

struct StepResult {
  std::vector<double> rewards;
  int next_state = 0;
};

StepResult step(const MGSpec& spec, int h, int s, int a, Rng& rng);

struct Transition {
  int h = 0;
  int state = 0;
  int joint_action = 0;
  std::vector<double> rewards;
  int next_state = 0;
};

using Trajectory = std::vector<Transition>;

}  // namespace marsgames
