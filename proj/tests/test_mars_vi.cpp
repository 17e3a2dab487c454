#include <catch_amalgamated.hpp>

#include <cmath>

#include "marsgames/errors.hpp"
#include "marsgames/instances.hpp"
#include "marsgames/mars_vi.hpp"
#include "marsgames/risk_dp.hpp"
#include "oracles.hpp"

using namespace marsgames;

namespace {

LearnerConfig config_for(int K, uint64_t seed = 0,
                         EquilibriumKind kind = EquilibriumKind::kCCE) {
  LearnerConfig cfg;
  cfg.solver = kind;
  cfg.episodes = K;
  cfg.seed = seed;
  return cfg;
}

// Deterministic 1-state single-agent game with reward r for every action.
MGSpec flat_game(int H, double beta, double r, int actions = 1) {
  MGSpec spec(H, 1, {actions}, {beta});
  for (int h = 0; h < H; ++h)
    for (int a = 0; a < actions; ++a) {
      spec.transition(h, 0, a, 0) = 1.0;
      spec.reward(h, 0, 0, a) = r;
    }
  return spec;
}

}  // namespace

TEST_CASE("bonus formula") {
  // S = 2, H = 2, evaluated at step index 0 so the remaining horizon is 2.
  MGSpec spec(2, 2, {1}, {1.0});
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s) spec.transition(h, s, 0, 0) = 1.0;
  LearnerConfig cfg = config_for(1);
  // iota = log(2 S A H K / delta) = 4 with S A H K = 4.
  cfg.delta = 2.0 * 2 * 1 * 2 * 1 / std::exp(4.0);
  LearnerState state(spec, cfg);
  REQUIRE(std::abs(state.iota() - 4.0) < 1e-12);
  REQUIRE_THROWS_AS(state.bonus(0, 0, 0, 0), ZeroCount);
  Rng rng(0);
  for (int i = 0; i < 8; ++i) state.act_and_record(spec, rng);
  REQUIRE(state.count(0, 0, 0) == 8);
  const double gamma = state.bonus(0, 0, 0, 0);
  REQUIRE(std::abs(gamma - (std::exp(2.0) - 1.0)) < 1e-12);
  REQUIRE(std::abs(gamma - 6.389056) < 1e-6);
  for (int i = 0; i < 8; ++i) state.act_and_record(spec, rng);
  REQUIRE(std::abs(state.bonus(0, 0, 0, 0) - gamma / std::sqrt(2.0)) < 1e-12);
  // One step later the remaining horizon is 1.
  REQUIRE(state.bonus(1, 0, 0, 0) < state.bonus(0, 0, 0, 0));
}

TEST_CASE("bonus vanishes as beta goes to zero and grows with |beta|") {
  auto gamma_at = [](double beta) {
    const MGSpec spec = flat_game(3, beta, 0.5);
    LearnerState state(spec, config_for(10));
    Rng rng(0);
    state.act_and_record(spec, rng);
    return state.bonus(0, 0, 0, 0);
  };
  REQUIRE(gamma_at(1e-9) < 1e-7);
  // |e^{beta u} - 1| grows with |beta| for each sign separately.
  for (double sign : {1.0, -1.0}) {
    double last = 0.0;
    for (double mag : {0.01, 0.1, 0.5, 1.0, 2.0}) {
      const double g = gamma_at(sign * mag);
      REQUIRE(g > last);
      last = g;
    }
  }
}

TEST_CASE("q_update defaults, saturation and the noiseless limit") {
  for (double beta : {1.0, -1.0}) {
    const MGSpec spec = flat_game(3, beta, 1.0);
    SECTION("unvisited pairs take the trivial bounds") {
      LearnerState state(spec, config_for(5));
      for (int h = 0; h < 3; ++h) {
        const auto [up, lo] = state.q_update(h, 0, 0, 0);
        REQUIRE(up == 3.0 - h);
        REQUIRE(lo == 0.0);
      }
    }
    SECTION("a huge bonus saturates both clamps") {
      LearnerConfig cfg = config_for(5);
      cfg.bonus_scale = 1e6;
      LearnerState state(spec, cfg);
      Rng rng(0);
      state.act_and_record(spec, rng);
      state.backward_pass();
      for (int h = 0; h < 3; ++h) {
        REQUIRE(std::abs(state.q_upper(h, 0, 0, 0) - (3.0 - h)) < 1e-12);
        REQUIRE(std::abs(state.q_lower(h, 0, 0, 0)) < 1e-12);
      }
    }
    SECTION("last step with a tiny bonus recovers the reward") {
      LearnerConfig cfg = config_for(5);
      cfg.bonus_scale = 1e-12;
      LearnerState state(spec, cfg);
      Rng rng(0);
      state.act_and_record(spec, rng);
      state.backward_pass();
      REQUIRE(std::abs(state.q_upper(2, 0, 0, 0) - 1.0) < 1e-9);
      REQUIRE(std::abs(state.q_lower(2, 0, 0, 0) - 1.0) < 1e-9);
      REQUIRE(std::abs(state.v_upper(0, 0, 0) - 3.0) < 1e-9);
      REQUIRE(std::abs(state.v_lower(0, 0, 0) - 3.0) < 1e-9);
    }
  }
}

TEST_CASE("first episode uses the default bounds everywhere") {
  const MGSpec spec = random_mg(1, 3, 3, {2, 2}, {0.8, -1.1}).spec;
  LearnerState state(spec, config_for(10));
  state.backward_pass();
  for (int m = 0; m < 2; ++m) {
    REQUIRE(std::abs(state.v_upper(0, m, 0) - 3.0) < 1e-12);
    REQUIRE(std::abs(state.v_lower(0, m, 0)) < 1e-12);
  }
  CertifiedPolicy cert = initial_certificate(state);
  REQUIRE(cert.delta_v == 3.0);
  REQUIRE(std::abs(normalized_gap_statistic(state) - 3.0) < 1e-12);
  REQUIRE(certify(state, cert));
  REQUIRE(cert.delta_v == 3.0);
  REQUIRE(*cert.policy == state.policy());
  REQUIRE(cert.episode == 1);
}

TEST_CASE("single agent policy is greedy in the upper estimate") {
  const MGSpec spec = random_mg(4, 2, 3, {3}, {1.5}).spec;
  const auto result = run(spec, config_for(40, 2));
  const auto& state = result.final_state;
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 2; ++s) {
      int best = 0;
      for (int a = 1; a < 3; ++a)
        if (state.q_upper(h, 0, s, a) > state.q_upper(h, 0, s, best)) best = a;
      REQUIRE(std::abs(state.policy().at(h, s)[best] - 1.0) < 1e-10);
    }
}

TEST_CASE("single agent trace matches a reference optimistic iteration") {
  const MGSpec spec = random_mg(8, 2, 3, {2}, {-1.3}).spec;
  const int H = 3, S = 2, A = 2;
  const double beta = spec.betas[0];
  int checked = 0;
  auto observer = [&](const LearnerState& st, const EpisodeRecord& rec) {
    std::vector<double> next(S, 1.0), cur(S);
    for (int h = H - 1; h >= 0; --h) {
      const double edge = std::exp(beta * (H - h));
      for (int s = 0; s < S; ++s) {
        double best = beta > 0 ? 0.0 : INFINITY;
        for (int a = 0; a < A; ++a) {
          double q = edge;
          const int n = st.count(h, s, a);
          if (n > 0) {
            double cont = 0;
            for (int s2 = 0; s2 < S; ++s2) cont += st.successor_count(h, s, a, s2) * next[s2];
            cont /= n;
            const double gamma = std::abs(std::exp(beta * (H - h)) - 1.0) *
                                 std::sqrt(S * st.iota() / n);
            q = std::exp(beta * spec.reward(h, 0, s, a)) * cont;
            q = beta > 0 ? std::min(q + gamma, edge) : std::max(q - gamma, edge);
          }
          best = beta > 0 ? std::max(best, q) : std::min(best, q);
        }
        cur[s] = best;
      }
      next = cur;
    }
    REQUIRE(std::abs(rec.v_upper[0] - std::log(next[0]) / beta) < 1e-10);
    ++checked;
  };
  run(spec, config_for(200, 5), observer);
  REQUIRE(checked == 200);
}

TEST_CASE("sandwich and bookkeeping invariants hold throughout a run") {
  const MGSpec spec = random_mg(21, 3, 3, {2, 2}, {1.2, -0.7}, 0.3).spec;
  for (auto kind : {EquilibriumKind::kCCE, EquilibriumKind::kCE, EquilibriumKind::kNE}) {
    double last_delta = 3.0;
    run(spec, config_for(60, 1, kind), [&](const LearnerState& st, const EpisodeRecord& rec) {
      REQUIRE(rec.delta_v <= last_delta);
      last_delta = rec.delta_v;
      for (int h = 0; h < 3; ++h)
        for (int m = 0; m < 2; ++m)
          for (int s = 0; s < 3; ++s) {
            const double top = 3.0 - h + 1e-12;
            REQUIRE(st.v_lower(h, m, s) >= -1e-12);
            REQUIRE(st.v_lower(h, m, s) <= st.v_upper(h, m, s) + 1e-12);
            REQUIRE(st.v_upper(h, m, s) <= top);
            for (int a = 0; a < 4; ++a) {
              REQUIRE(st.q_lower(h, m, s, a) >= -1e-12);
              REQUIRE(st.q_lower(h, m, s, a) <= st.q_upper(h, m, s, a) + 1e-12);
              REQUIRE(st.q_upper(h, m, s, a) <= top);
            }
          }
      for (int m = 0; m < 2; ++m) {
        REQUIRE(st.v_upper(3, m, 0) == 0.0);
        REQUIRE(st.v_lower(3, m, 0) == 0.0);
      }
      for (int h = 0; h < 3; ++h)
        for (int s = 0; s < 3; ++s)
          for (int a = 0; a < 4; ++a) {
            int total = 0;
            double mass = 0;
            for (int s2 = 0; s2 < 3; ++s2) {
              total += st.successor_count(h, s, a, s2);
              mass += st.empirical(h, s, a, s2);
            }
            REQUIRE(total == st.count(h, s, a));
            if (total > 0) REQUIRE(std::abs(mass - 1.0) < 1e-12);
          }
      if (kind == EquilibriumKind::kNE) {
        for (int h = 0; h < 3; ++h)
          for (int s = 0; s < 3; ++s)
            REQUIRE(factorization_error(st.space(), st.policy().at(h, s)) < 1e-8);
      }
    });
  }
}

TEST_CASE("one visit gives a point-mass empirical row") {
  const MGSpec spec = random_mg(2, 3, 2, {2}, {1.0}).spec;
  LearnerState state(spec, config_for(3));
  state.backward_pass();
  Rng rng(9);
  const auto traj = state.act_and_record(spec, rng);
  REQUIRE(traj.size() == 2);
  const auto& t = traj[0];
  for (int s2 = 0; s2 < 3; ++s2)
    REQUIRE(state.empirical(0, t.state, t.joint_action, s2) == (s2 == t.next_state ? 1.0 : 0.0));
  REQUIRE(traj[1].state == t.next_state);
}

TEST_CASE("deterministic game and point-mass policy give a fixed trajectory") {
  const MGSpec spec = flat_game(4, 1.0, 0.3);
  LearnerState state(spec, config_for(2));
  state.backward_pass();
  Rng a(1), b(999);
  const auto t1 = state.act_and_record(spec, a);
  const auto t2 = state.act_and_record(spec, b);
  for (int h = 0; h < 4; ++h) {
    REQUIRE(t1[h].joint_action == t2[h].joint_action);
    REQUIRE(t1[h].next_state == t2[h].next_state);
  }
}

TEST_CASE("zero gap certifies immediately") {
  // Only one action and a bonus so small the bounds coincide after a visit.
  const MGSpec spec = flat_game(2, 0.5, 0.7);
  LearnerConfig cfg = config_for(3);
  cfg.bonus_scale = 1e-300;
  const auto result = run(spec, cfg);
  REQUIRE(result.records[1].gap_statistic < 1e-12);
  REQUIRE(result.records[1].certified);
  REQUIRE(result.certified.episode == 3);  // ties re-certify
}

TEST_CASE("K = 1 keeps the trivial certificate") {
  const MGSpec spec = random_mg(3, 2, 3, {2, 2}, {1, 1}).spec;
  const auto result = run(spec, config_for(1));
  REQUIRE(result.records.size() == 1);
  REQUIRE(result.certified.delta_v == 3.0);
  REQUIRE(result.final_state.episode() == 1);
  REQUIRE(result.snapshots.size() == 1);
}

TEST_CASE("runs are reproducible and seeds matter") {
  const MGSpec spec = random_mg(7, 3, 3, {2, 2}, {0.5, -0.5}).spec;
  const auto a = run(spec, config_for(100, 11));
  const auto b = run(spec, config_for(100, 11));
  const auto c = run(spec, config_for(100, 12));
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (size_t i = 0; i < a.snapshots.size(); ++i) {
    REQUIRE(*a.snapshots[i].policy == *b.snapshots[i].policy);
  }
  for (size_t i = 0; i < a.records.size(); ++i) {
    REQUIRE(a.records[i].v_upper == b.records[i].v_upper);
    REQUIRE(a.records[i].v_lower == b.records[i].v_lower);
  }
  bool differs = false;
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 3; ++s)
      for (int j = 0; j < 4; ++j)
        differs = differs || a.final_state.count(h, s, j) != c.final_state.count(h, s, j);
  REQUIRE(differs);
}

TEST_CASE("snapshot stride covers every episode exactly once") {
  const MGSpec spec = random_mg(7, 2, 2, {2, 2}, {0.5, 0.5}).spec;
  LearnerConfig cfg = config_for(23, 0);
  cfg.snapshot_stride = 5;
  const auto result = run(spec, cfg);
  REQUIRE(result.snapshots.size() == 5);
  int covered = 0;
  for (const auto& snap : result.snapshots) {
    REQUIRE(snap.episode == covered + 1);
    covered += snap.weight;
  }
  REQUIRE(covered == 23);
}

TEST_CASE("invalid learner parameters") {
  const MGSpec spec = flat_game(2, 1.0, 0.5);
  LearnerConfig cfg = config_for(0);
  REQUIRE_THROWS_AS(LearnerState(spec, cfg), ParameterError);
  cfg = config_for(5);
  cfg.delta = 0.0;
  REQUIRE_THROWS_AS(LearnerState(spec, cfg), ParameterError);
  cfg = config_for(5);
  cfg.snapshot_stride = 0;
  REQUIRE_THROWS_AS(run(spec, cfg), ParameterError);
}

TEST_CASE("optimism and pessimism hold in most episodes") {
  // Small version of the frequency check: 5 seeds, K = 200.
  const MGSpec spec = random_mg(2, 2, 2, {2, 2}, {1.0, -0.5}).spec;
  int violations_up = 0, violations_lo = 0, total = 0;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    run(spec, config_for(200, seed), [&](const LearnerState& st, const EpisodeRecord& rec) {
      for (int m = 0; m < 2; ++m) {
        const double star = initial_value(spec, best_response(spec, st.policy(), m).table);
        const double value = initial_value(spec, eval_policy(spec, st.policy(), m));
        violations_up += rec.v_upper[m] < star - 1e-9;
        violations_lo += rec.v_lower[m] > value + 1e-9;
      }
      ++total;
    });
  }
  REQUIRE(violations_up <= 0.1 * total);
  REQUIRE(violations_lo <= 0.1 * total);
}
