#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "marsgames/eq_solvers.hpp"
#include "marsgames/game_model.hpp"

namespace marsgames {

struct LearnerConfig {
  EquilibriumKind solver = EquilibriumKind::kCCE;
  double bonus_scale = 1.0;  // the constant C in the bonus
  double delta = 0.1;        // confidence level
  int episodes = 1;          // K
  uint64_t seed = 0;
  int snapshot_stride = 1;
};

// Mutable state of the self-play learner. Built from the game's shape and
// risk parameters only; transitions and rewards are learned from samples.
class LearnerState {
 public:
  LearnerState(const MGSpec& spec, const LearnerConfig& config);

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_agents() const { return space_.num_agents(); }
  int joint_actions() const { return space_.joint_size(); }
  const JointActionSpace& space() const { return space_; }
  const std::vector<double>& betas() const { return betas_; }
  int initial_state() const { return initial_state_; }
  double iota() const { return iota_; }
  double bonus_scale() const { return bonus_scale_; }
  EquilibriumKind solver() const { return solver_; }
  // Number of completed episodes.
  int episode() const { return episode_; }

  int count(int h, int s, int a) const { return counts_[sa(h, s, a)]; }
  int successor_count(int h, int s, int a, int s2) const {
    return successor_counts_[sa(h, s, a) * num_states_ + s2];
  }
  double empirical(int h, int s, int a, int s2) const {
    return empirical_[sa(h, s, a) * num_states_ + s2];
  }

  // Exponential-domain estimates and their log-domain counterparts.
  double q_exp_upper(int h, int m, int s, int a) const { return q_exp_upper_[hmsa(h, m, s, a)]; }
  double q_exp_lower(int h, int m, int s, int a) const { return q_exp_lower_[hmsa(h, m, s, a)]; }
  double q_upper(int h, int m, int s, int a) const { return q_upper_[hmsa(h, m, s, a)]; }
  double q_lower(int h, int m, int s, int a) const { return q_lower_[hmsa(h, m, s, a)]; }
  // h ranges over 0..H; row H is the terminal zero row.
  double v_upper(int h, int m, int s) const { return v_upper_[hms(h, m, s)]; }
  double v_lower(int h, int m, int s) const { return v_lower_[hms(h, m, s)]; }
  double v_exp_upper(int h, int m, int s) const { return v_exp_upper_[hms(h, m, s)]; }
  double v_exp_lower(int h, int m, int s) const { return v_exp_lower_[hms(h, m, s)]; }

  const JointPolicy& policy() const { return policy_; }

  // C * |e^{beta_m (H-h)} - 1| * sqrt(S * iota / N_h(s,a)) with 0-based h.
  // Throws ZeroCount for unvisited pairs.
  double bonus(int h, int m, int s, int a) const;

  // Recomputes the optimistic/pessimistic estimates of one entry from the
  // current counts and next-step values; returns (upper, lower) in log domain.
  // Unvisited pairs get (H-h, 0).
  std::pair<double, double> q_update(int h, int m, int s, int a);

  // Full backward sweep: estimates, one-step equilibria and values.
  void backward_pass();

  // Executes the current policy for one episode and records the samples.
  Trajectory act_and_record(const MGSpec& spec, Rng& rng);

  // Payoffs fed to the one-step equilibrium solver at (h,s).
  GameMatrix stage_game(int h, int s) const;

 private:
  size_t sa(int h, int s, int a) const {
    return (static_cast<size_t>(h) * num_states_ + s) * space_.joint_size() + a;
  }
  size_t hmsa(int h, int m, int s, int a) const {
    return ((static_cast<size_t>(h) * num_agents() + m) * num_states_ + s) *
               space_.joint_size() + a;
  }
  size_t hms(int h, int m, int s) const {
    return (static_cast<size_t>(h) * num_agents() + m) * num_states_ + s;
  }

  int horizon_;
  int num_states_;
  JointActionSpace space_;
  std::vector<double> betas_;
  int initial_state_;
  double bonus_scale_;
  double iota_;
  EquilibriumKind solver_;
  int episode_ = 0;

  std::vector<int> counts_;
  std::vector<int> successor_counts_;
  std::vector<double> empirical_;
  std::vector<double> observed_rewards_;  // [h][m][s][a], set on first visit

  std::vector<double> q_exp_upper_, q_exp_lower_, q_upper_, q_lower_;
  // Truncated exponential estimates, i.e. e^{beta Q} for the stored Q.
  std::vector<double> clipped_upper_, clipped_lower_;
  std::vector<double> v_upper_, v_lower_, v_exp_upper_, v_exp_lower_;
  JointPolicy policy_;
};

struct CertifiedPolicy {
  std::shared_ptr<const JointPolicy> policy;
  double delta_v = 0.0;  // best normalized gap statistic so far
  int episode = 0;       // 1-based episode at which policy was recorded
};

CertifiedPolicy initial_certificate(const LearnerState& state);

// max_m H (e^{beta_m Vup_1,m(s1)} - e^{beta_m Vlo_1,m(s1)}) / (e^{beta_m H} - 1)
double normalized_gap_statistic(const LearnerState& state);
// max_m (Vup_1,m - Vlo_1,m)(s1)
double raw_gap_statistic(const LearnerState& state);

// Replaces the certified policy when the current statistic does not exceed
// the recorded one. Returns true when it did.
bool certify(const LearnerState& state, CertifiedPolicy& cert);

struct PolicySnapshot {
  int episode = 0;  // 1-based
  int weight = 1;   // episodes this snapshot stands for on the stride grid
  std::shared_ptr<const JointPolicy> policy;
};

struct EpisodeRecord {
  int episode = 0;  // 1-based
  std::vector<double> v_upper;  // V-upper at (step 1, s1) per agent
  std::vector<double> v_lower;
  double gap_statistic = 0.0;
  double raw_gap = 0.0;
  double delta_v = 0.0;  // after certification
  bool certified = false;
};

struct RunResult {
  std::vector<PolicySnapshot> snapshots;
  std::vector<EpisodeRecord> records;
  CertifiedPolicy certified;
  LearnerState final_state;
};

// Optional per-episode observer, called after certification and before the
// episode is played.
using EpisodeObserver =
    std::function<void(const LearnerState&, const EpisodeRecord&)>;

RunResult run(const MGSpec& spec, const LearnerConfig& config,
              const EpisodeObserver& observer = {});

}  // namespace marsgames
