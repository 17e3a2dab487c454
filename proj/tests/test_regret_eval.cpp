#include <catch_amalgamated.hpp>

#include <cmath>

#include "marsgames/errors.hpp"
#include "marsgames/instances.hpp"
#include "marsgames/regret_eval.hpp"
#include "oracles.hpp"

using namespace marsgames;

TEST_CASE("phi closed form, evenness, limit and monotonicity") {
  REQUIRE(std::abs(phi(1, 1) - (std::exp(1.0) - 1.0)) < 1e-12);
  for (double u : {0.5, 1.0, 3.0, 7.0})
    for (double b : {1e-3, 0.3, 1.0, 2.5}) {
      REQUIRE(phi(u, b) == phi(u, -b));
      REQUIRE(phi(u, b) > 1.0);
      REQUIRE(phi(u, b * 1.1) > phi(u, b));
      REQUIRE(phi(u * 1.1, b) > phi(u, b));
    }
  REQUIRE(std::abs(phi(2, 1e-8) - 1.0) < 1e-6);
  REQUIRE_THROWS_AS(phi(0, 1), DomainError);
  REQUIRE_THROWS_AS(phi(-1, 1), DomainError);
  REQUIRE_THROWS_AS(phi(1, 0), DomainError);
}

TEST_CASE("most risk-sensitive agent breaks ties by index") {
  REQUIRE(most_risk_sensitive_agent({0.1, 2.0}) == 1);
  REQUIRE(most_risk_sensitive_agent({-2.0, 2.0, 1.0}) == 0);
  REQUIRE(most_risk_sensitive_agent({0.5, -0.7, 0.7}) == 1);
}

TEST_CASE("gaps match brute-force enumeration") {
  for (uint64_t seed = 0; seed < 15; ++seed) {
    const MGSpec spec = oracle::tiny_game(seed + 300);
    const JointPolicy pi = oracle::random_policy(spec, seed);
    const auto cce = episode_gaps(spec, pi, EquilibriumKind::kCCE);
    const auto ce = episode_gaps(spec, pi, EquilibriumKind::kCE);
    for (int m = 0; m < 2; ++m) {
      const double v = oracle::policy_value(spec, pi, m);
      REQUIRE(std::abs(cce[m] - (oracle::best_response_value(spec, pi, m) - v)) < 1e-9);
      REQUIRE(std::abs(ce[m] - (oracle::best_modification_value(spec, pi, m) - v)) < 1e-9);
      REQUIRE(cce[m] >= -1e-9);
      REQUIRE(ce[m] >= -1e-9);
    }
  }
}

TEST_CASE("CE gaps dominate CCE gaps on product policies; NE needs a product") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const MGSpec spec = oracle::tiny_game(seed + 400);
    const JointPolicy product = oracle::random_policy(spec, seed, true);
    const auto ne = episode_gaps(spec, product, EquilibriumKind::kNE);
    const auto cce = episode_gaps(spec, product, EquilibriumKind::kCCE);
    const auto ce = episode_gaps(spec, product, EquilibriumKind::kCE);
    for (int m = 0; m < 2; ++m) {
      REQUIRE(ne[m] == cce[m]);
      REQUIRE(ce[m] >= cce[m] - 1e-9);
    }
    const JointPolicy correlated = oracle::random_policy(spec, seed, false);
    REQUIRE_THROWS_AS(episode_gaps(spec, correlated, EquilibriumKind::kNE), NotProductPolicy);
  }
}

TEST_CASE("dominant-strategy equilibrium has zero gaps") {
  MGSpec spec(1, 1, {2, 2}, {1.0, -2.0});
  const auto& space = spec.space();
  for (int a = 0; a < 4; ++a) {
    spec.transition(0, 0, a, 0) = 1.0;
    spec.reward(0, 0, 0, a) = space.own_action(a, 0) == 0 ? 0.8 : 0.3;
    spec.reward(0, 1, 0, a) = space.own_action(a, 1) == 0 ? 0.9 : 0.1;
  }
  JointPolicy pi(1, 1, space, true);
  pi.at(0, 0)[0] = 1.0;
  for (auto kind : {EquilibriumKind::kNE, EquilibriumKind::kCE, EquilibriumKind::kCCE}) {
    for (double g : episode_gaps(spec, pi, kind)) REQUIRE(std::abs(g) <= 1e-9);
    REQUIRE(certify_approx(spec, pi, kind) <= 1e-9);
  }
}

TEST_CASE("bias instance gaps and cumulative ratio") {
  const int H = 3, K = 10000;
  const std::vector<double> betas{0.1, 1.5};
  const auto inst = bias_instance(betas, H, K);
  const double per_episode = H * phi(H, 1.5) / std::sqrt(double(K));
  const auto gaps = episode_gaps(inst.spec, *inst.fixture_policy, EquilibriumKind::kCCE);
  REQUIRE(std::abs(gaps[0] - per_episode) < 1e-12);
  REQUIRE(std::abs(gaps[1]) < 1e-12);

  RegretLedger ledger(EquilibriumKind::kCCE, betas, H);
  for (int k = 1; k <= 50; ++k) accumulate(ledger, k, gaps);
  REQUIRE(std::abs(ledger.naive_cum - 50 * per_episode) < 1e-9);
  REQUIRE(std::abs(ledger.balanced_cum / ledger.naive_cum - 1.0 / phi(H, 0.1)) < 1e-12);
  REQUIRE(ledger.agent_cum[1] == 0.0);
}

TEST_CASE("accumulate arithmetic") {
  RegretLedger ledger(EquilibriumKind::kCE, {2.0}, 3);
  accumulate(ledger, 1, {0.0});
  REQUIRE(ledger.rows[0].naive_inc == 0.0);
  REQUIRE(ledger.rows[0].balanced_inc == 0.0);
  const auto& row = accumulate(ledger, 2, {0.6});
  REQUIRE(row.balanced_inc == 0.6 / phi(3, 2.0));
  // Weighted rows extend the increment and report their last episode.
  const auto& wide = accumulate(ledger, 3, {0.3}, 4);
  REQUIRE(wide.episode == 6);
  REQUIRE(std::abs(wide.naive_cum - (0.6 + 4 * 0.3)) < 1e-15);
  REQUIRE_THROWS_AS(accumulate(ledger, 7, {0.1, 0.2}), ParameterError);
  REQUIRE_THROWS_AS(accumulate(ledger, 7, {0.1}, 0), ParameterError);
}

TEST_CASE("naive regret is bounded by phi of the most sensitive agent times balanced") {
  const std::vector<double> betas{0.3, -1.7, 1.1};
  const double phi_star = phi(4, 1.7);
  RegretLedger ledger(EquilibriumKind::kCCE, betas, 4);
  marsgames::Rng rng(3);
  for (int k = 1; k <= 500; ++k) {
    std::vector<double> gaps(3);
    for (double& g : gaps) g = 4.0 * rng.uniform();
    accumulate(ledger, k, gaps);
    REQUIRE(ledger.naive_cum <= phi_star * ledger.balanced_cum + 1e-9);
  }
}

TEST_CASE("padding the horizon keeps gaps and changes epsilon") {
  const MGSpec base = oracle::tiny_game(5);
  const JointPolicy pi = oracle::random_policy(base, 7);
  const int H = base.horizon, S = base.num_states, A = base.joint_actions();
  MGSpec padded(2 * H, S, base.action_sizes, base.betas, base.initial_state);
  JointPolicy padded_pi(2 * H, S, padded.space());
  for (int h = 0; h < 2 * H; ++h)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        padded_pi.at(h, s)[a] = h < H ? pi.at(h, s)[a] : 1.0 / A;
        for (int s2 = 0; s2 < S; ++s2)
          padded.transition(h, s, a, s2) = h < H ? base.transition(h, s, a, s2) : (s2 == s);
        for (int m = 0; m < 2; ++m) padded.reward(h, m, s, a) = h < H ? base.reward(h, m, s, a) : 0;
      }
    }
  const auto g1 = episode_gaps(base, pi, EquilibriumKind::kCCE);
  const auto g2 = episode_gaps(padded, padded_pi, EquilibriumKind::kCCE);
  for (int m = 0; m < 2; ++m) REQUIRE(std::abs(g1[m] - g2[m]) < 1e-12);
  const double e1 = certify_approx(base, pi, EquilibriumKind::kCCE);
  const double e2 = certify_approx(padded, padded_pi, EquilibriumKind::kCCE);
  REQUIRE(e2 < e1);
}

TEST_CASE("csv layout") {
  RegretLedger ledger(EquilibriumKind::kCCE, {1.0, -1.0}, 2);
  accumulate(ledger, 1, {0.5, 0.25});
  auto& row = accumulate(ledger, 2, {0.125, 0.0});
  row.eps_certified = 0.1;
  row.delta_v = 0.75;
  const std::string csv = ledger_to_csv(ledger);
  REQUIRE(csv.rfind("episode,kind,naive_inc,balanced_inc,naive_cum,balanced_cum,"
                    "gap_agent_1,gap_agent_2,eps_certified,delta_v\n", 0) == 0);
  REQUIRE(csv.find("\n1,cce,0.5,") != std::string::npos);
  REQUIRE(csv.find(",0.5,0.25,,\n") != std::string::npos);
  REQUIRE(csv.find(",0.10000000000000001,0.75\n") != std::string::npos);
}
