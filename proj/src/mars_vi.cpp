#include "marsgames/mars_vi.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marsgames/errors.hpp"

namespace marsgames {

namespace {

double sign_of(double beta) { return beta < 0 ? -1.0 : 1.0; }

// Clamp an exponential-domain value into the range spanned by 1 and edge.
double clamp_exp(double value, double edge) {
  return std::clamp(value, std::min(1.0, edge), std::max(1.0, edge));
}

}  // namespace

LearnerState::LearnerState(const MGSpec& spec, const LearnerConfig& config)
    : horizon_(spec.horizon),
      num_states_(spec.num_states),
      space_(spec.space()),
      betas_(spec.betas),
      initial_state_(spec.initial_state),
      bonus_scale_(config.bonus_scale),
      solver_(config.solver),
      policy_(spec.horizon, spec.num_states, spec.space(),
              config.solver == EquilibriumKind::kNE || spec.num_agents() == 1) {
  if (config.episodes < 1) throw ParameterError("episode count K must be >= 1");
  if (!(config.delta > 0.0 && config.delta <= 1.0)) {
    throw ParameterError("delta must lie in (0, 1]");
  }
  if (!(config.bonus_scale > 0.0)) throw ParameterError("bonus scale C must be positive");
  const double S = num_states_, A = space_.joint_size(), H = horizon_;
  iota_ = std::log(2.0 * S * A * H * config.episodes / config.delta);

  const size_t n_sa = static_cast<size_t>(horizon_) * num_states_ * space_.joint_size();
  const size_t n_hmsa = n_sa * num_agents();
  counts_.assign(n_sa, 0);
  successor_counts_.assign(n_sa * num_states_, 0);
  empirical_.assign(n_sa * num_states_, 0.0);
  observed_rewards_.assign(n_hmsa, 0.0);
  q_exp_upper_.assign(n_hmsa, 0.0);
  q_exp_lower_.assign(n_hmsa, 0.0);
  q_upper_.assign(n_hmsa, 0.0);
  q_lower_.assign(n_hmsa, 0.0);
  clipped_upper_.assign(n_hmsa, 1.0);
  clipped_lower_.assign(n_hmsa, 1.0);
  const size_t n_hms = static_cast<size_t>(horizon_ + 1) * num_agents() * num_states_;
  v_upper_.assign(n_hms, 0.0);
  v_lower_.assign(n_hms, 0.0);
  v_exp_upper_.assign(n_hms, 1.0);
  v_exp_lower_.assign(n_hms, 1.0);
  std::fill(policy_.dist.begin(), policy_.dist.end(), 1.0 / space_.joint_size());
}

double LearnerState::bonus(int h, int m, int s, int a) const {
  const int n = count(h, s, a);
  if (n < 1) {
    throw ZeroCount("bonus requested for an unvisited pair at step " +
                    std::to_string(h + 1));
  }
  const double beta = betas_[m];
  return bonus_scale_ * std::abs(std::expm1(beta * (horizon_ - h))) *
         std::sqrt(num_states_ * iota_ / n);
}

std::pair<double, double> LearnerState::q_update(int h, int m, int s, int a) {
  const double beta = betas_[m];
  const double edge = std::exp(beta * (horizon_ - h));
  const size_t idx = hmsa(h, m, s, a);
  if (count(h, s, a) == 0) {
    q_exp_upper_[idx] = edge;
    q_exp_lower_[idx] = 1.0;
    clipped_upper_[idx] = edge;
    clipped_lower_[idx] = 1.0;
    q_upper_[idx] = horizon_ - h;
    q_lower_[idx] = 0.0;
    return {q_upper_[idx], q_lower_[idx]};
  }
  double next_upper = 0.0, next_lower = 0.0;
  const size_t row = sa(h, s, a) * num_states_;
  for (int s2 = 0; s2 < num_states_; ++s2) {
    const double p = empirical_[row + s2];
    if (p == 0.0) continue;
    next_upper += p * v_exp_upper_[hms(h + 1, m, s2)];
    next_lower += p * v_exp_lower_[hms(h + 1, m, s2)];
  }
  const double immediate = std::exp(beta * observed_rewards_[idx]);
  const double upper = immediate * next_upper;
  const double lower = immediate * next_lower;
  const double gamma = bonus(h, m, s, a);
  q_exp_upper_[idx] = upper;
  q_exp_lower_[idx] = lower;
  if (beta > 0) {
    clipped_upper_[idx] = std::min(upper + gamma, edge);
    clipped_lower_[idx] = std::max(lower - gamma, 1.0);
  } else {
    clipped_upper_[idx] = std::max(upper - gamma, edge);
    clipped_lower_[idx] = std::min(lower + gamma, 1.0);
  }
  q_upper_[idx] = std::log(clipped_upper_[idx]) / beta;
  q_lower_[idx] = std::log(clipped_lower_[idx]) / beta;
  return {q_upper_[idx], q_lower_[idx]};
}

GameMatrix LearnerState::stage_game(int h, int s) const {
  GameMatrix game(space_.sizes());
  for (int m = 0; m < num_agents(); ++m) {
    const double sign = sign_of(betas_[m]);
    for (int a = 0; a < space_.joint_size(); ++a) {
      game.payoff(m, a) = sign * clipped_upper_[hmsa(h, m, s, a)];
    }
  }
  return game;
}

void LearnerState::backward_pass() {
  const int A = space_.joint_size();
  for (int m = 0; m < num_agents(); ++m) {
    for (int s = 0; s < num_states_; ++s) {
      v_upper_[hms(horizon_, m, s)] = 0.0;
      v_lower_[hms(horizon_, m, s)] = 0.0;
      v_exp_upper_[hms(horizon_, m, s)] = 1.0;
      v_exp_lower_[hms(horizon_, m, s)] = 1.0;
    }
  }
  for (int h = horizon_ - 1; h >= 0; --h) {
    for (int s = 0; s < num_states_; ++s) {
      for (int a = 0; a < A; ++a) {
        for (int m = 0; m < num_agents(); ++m) q_update(h, m, s, a);
      }
    }
    for (int s = 0; s < num_states_; ++s) {
      const auto eq = solve_equilibrium(stage_game(h, s), solver_);
      auto row = policy_.at(h, s);
      std::copy(eq.probs.begin(), eq.probs.end(), row.begin());
      for (int m = 0; m < num_agents(); ++m) {
        const double beta = betas_[m];
        const double edge = std::exp(beta * (horizon_ - h));
        double upper = 0.0, lower = 0.0;
        for (int a = 0; a < A; ++a) {
          if (row[a] == 0.0) continue;
          upper += row[a] * clipped_upper_[hmsa(h, m, s, a)];
          lower += row[a] * clipped_lower_[hmsa(h, m, s, a)];
        }
        upper = clamp_exp(upper, edge);
        lower = clamp_exp(lower, edge);
        v_exp_upper_[hms(h, m, s)] = upper;
        v_exp_lower_[hms(h, m, s)] = lower;
        v_upper_[hms(h, m, s)] = std::log(upper) / beta;
        v_lower_[hms(h, m, s)] = std::log(lower) / beta;
      }
    }
  }
}

Trajectory LearnerState::act_and_record(const MGSpec& spec, Rng& rng) {
  Trajectory trajectory;
  trajectory.reserve(horizon_);
  int s = initial_state_;
  for (int h = 0; h < horizon_; ++h) {
    const int a = rng.sample(policy_.at(h, s));
    auto outcome = step(spec, h, s, a, rng);
    const size_t idx = sa(h, s, a);
    for (int m = 0; m < num_agents(); ++m) {
      observed_rewards_[hmsa(h, m, s, a)] = outcome.rewards[m];
    }
    counts_[idx] += 1;
    successor_counts_[idx * num_states_ + outcome.next_state] += 1;
    const double n = counts_[idx];
    for (int s2 = 0; s2 < num_states_; ++s2) {
      empirical_[idx * num_states_ + s2] = successor_counts_[idx * num_states_ + s2] / n;
    }
    trajectory.push_back({h, s, a, std::move(outcome.rewards), outcome.next_state});
    s = outcome.next_state;
  }
  ++episode_;
  return trajectory;
}

double normalized_gap_statistic(const LearnerState& state) {
  const int H = state.horizon(), s1 = state.initial_state();
  double worst = 0.0;
  for (int m = 0; m < state.num_agents(); ++m) {
    const double beta = state.betas()[m];
    const double gap = H * (state.v_exp_upper(0, m, s1) - state.v_exp_lower(0, m, s1)) /
                       std::expm1(beta * H);
    worst = std::max(worst, gap);
  }
  // The statistic never exceeds H because both values lie in [0, H].
  return std::min(worst, static_cast<double>(H));
}

double raw_gap_statistic(const LearnerState& state) {
  double worst = 0.0;
  for (int m = 0; m < state.num_agents(); ++m) {
    worst = std::max(worst, state.v_upper(0, m, state.initial_state()) -
                                state.v_lower(0, m, state.initial_state()));
  }
  return worst;
}

CertifiedPolicy initial_certificate(const LearnerState& state) {
  CertifiedPolicy cert;
  cert.delta_v = state.horizon();
  return cert;
}

bool certify(const LearnerState& state, CertifiedPolicy& cert) {
  const double g = normalized_gap_statistic(state);
  if (g <= cert.delta_v) {
    cert.delta_v = g;
    cert.policy = std::make_shared<const JointPolicy>(state.policy());
    cert.episode = state.episode() + 1;
    return true;
  }
  return false;
}

RunResult run(const MGSpec& spec, const LearnerConfig& config,
              const EpisodeObserver& observer) {
  require_valid(spec);
  if (config.snapshot_stride < 1) throw ParameterError("snapshot stride must be >= 1");
  RunResult result{{}, {}, {}, LearnerState(spec, config)};
  LearnerState& state = result.final_state;
  result.certified = initial_certificate(state);
  result.records.reserve(config.episodes);
  Rng rng(config.seed);
  std::shared_ptr<const JointPolicy> last;
  for (int k = 1; k <= config.episodes; ++k) {
    try {
      state.backward_pass();
    } catch (const SolverFailure& e) {
      throw SolverFailure(e.reason(), "episode " + std::to_string(k) + ": " + e.what());
    }
    EpisodeRecord record;
    record.episode = k;
    for (int m = 0; m < spec.num_agents(); ++m) {
      record.v_upper.push_back(state.v_upper(0, m, spec.initial_state));
      record.v_lower.push_back(state.v_lower(0, m, spec.initial_state));
    }
    record.gap_statistic = normalized_gap_statistic(state);
    record.raw_gap = raw_gap_statistic(state);
    record.certified = certify(state, result.certified);
    record.delta_v = result.certified.delta_v;

    if ((k - 1) % config.snapshot_stride == 0) {
      if (!last || !(*last == state.policy())) {
        last = std::make_shared<const JointPolicy>(state.policy());
      }
      const int weight = std::min(config.snapshot_stride, config.episodes - k + 1);
      result.snapshots.push_back({k, weight, last});
    }
    if (observer) observer(state, record);
    result.records.push_back(std::move(record));
    state.act_and_record(spec, rng);
  }
  return result;
}

}  // namespace marsgames
