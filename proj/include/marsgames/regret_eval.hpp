#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marsgames/eq_solvers.hpp"
#include "marsgames/game_model.hpp"

namespace marsgames {

// Risk-dependent factor (e^{|beta| u} - 1) / (|beta| u). Requires u > 0 and
// beta != 0; throws DomainError otherwise.
double phi(double u, double beta);

// Index of the agent with the largest |beta| (lowest index on ties).
int most_risk_sensitive_agent(const std::vector<double>& betas);

// Per-agent log-domain gaps at (step 1, s1):
//   NE/CCE: best response value minus policy value,
//   CE:     best modification value minus policy value.
// NE requires a product policy (NotProductPolicy otherwise).
std::vector<double> episode_gaps(const MGSpec& spec, const JointPolicy& policy,
                                 EquilibriumKind kind);

// Smallest eps for which the policy is a (beta, eps)-approximate equilibrium
// of the given kind: max_m gap_m / phi(H, beta_m).
double certify_approx(const MGSpec& spec, const JointPolicy& policy,
                      EquilibriumKind kind);

struct RegretRow {
  int episode = 0;  // last episode covered by this row (1-based)
  int weight = 1;   // episodes represented by this row's increment
  std::vector<double> gaps;
  double naive_inc = 0.0;
  double balanced_inc = 0.0;
  double naive_cum = 0.0;
  double balanced_cum = 0.0;
  std::optional<double> eps_certified;
  std::optional<double> delta_v;
};

struct RegretLedger {
  EquilibriumKind kind = EquilibriumKind::kCCE;
  std::vector<double> betas;
  int horizon = 0;
  std::vector<RegretRow> rows;
  double naive_cum = 0.0;
  double balanced_cum = 0.0;
  // Per-agent normalized cumulative regret sum_k gap_m / phi(H, beta_m).
  std::vector<double> agent_cum;

  RegretLedger() = default;
  RegretLedger(EquilibriumKind kind, std::vector<double> betas, int horizon);
};

// Adds one episode's gaps. `weight` > 1 extends the increment piecewise
// constantly over that many episodes (subsampled snapshot grids).
RegretRow& accumulate(RegretLedger& ledger, int episode,
                      const std::vector<double>& gaps, int weight = 1);

std::string regret_csv_header(int num_agents);
std::string ledger_to_csv(const RegretLedger& ledger);

}  // namespace marsgames
