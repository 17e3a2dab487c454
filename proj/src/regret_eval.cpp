#include "marsgames/regret_eval.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <limits>

#include "marsgames/errors.hpp"
#include "marsgames/risk_dp.hpp"

namespace marsgames {

double phi(double u, double beta) {
  if (!(u > 0.0)) throw DomainError("phi requires u > 0");
  if (beta == 0.0 || !std::isfinite(beta)) throw DomainError("phi requires beta != 0");
  const double x = std::abs(beta) * u;
  return std::expm1(x) / x;
}

int most_risk_sensitive_agent(const std::vector<double>& betas) {
  int best = 0;
  for (int m = 1; m < static_cast<int>(betas.size()); ++m) {
    if (std::abs(betas[m]) > std::abs(betas[best])) best = m;
  }
  return best;
}

namespace {

// (1/beta) log(deviation / base) with a single log, so tiny gaps keep their
// relative precision.
double log_gap(double beta, double deviation, double base) {
  return std::log(deviation / base) / beta;
}

}  // namespace

std::vector<double> episode_gaps(const MGSpec& spec, const JointPolicy& policy,
                                 EquilibriumKind kind) {
  if (kind == EquilibriumKind::kNE && spec.num_agents() > 1) {
    bool product = policy.is_product;
    for (int h = 0; h < policy.horizon && product; ++h) {
      for (int s = 0; s < policy.num_states; ++s) {
        if (factorization_error(policy.space, policy.at(h, s)) > 1e-8) {
          product = false;
          break;
        }
      }
    }
    if (!product) throw NotProductPolicy("NE regret requires a product policy");
  }
  const int s1 = spec.initial_state;
  std::vector<double> gaps(spec.num_agents());
  for (int m = 0; m < spec.num_agents(); ++m) {
    const double beta = spec.betas[m];
    const auto own = eval_policy(spec, policy, m);
    // Range check of the policy value before taking the difference.
    to_value(own, 0, s1);
    double deviation = 0.0;
    if (kind == EquilibriumKind::kCE) {
      const auto best = best_modification(spec, policy, m);
      to_value(best.table, 0, s1);
      deviation = best.table.at(0, s1);
    } else {
      const auto best = best_response(spec, policy, m);
      to_value(best.table, 0, s1);
      deviation = best.table.at(0, s1);
    }
    gaps[m] = log_gap(beta, deviation, own.at(0, s1));
  }
  return gaps;
}

double certify_approx(const MGSpec& spec, const JointPolicy& policy,
                      EquilibriumKind kind) {
  const auto gaps = episode_gaps(spec, policy, kind);
  double eps = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < spec.num_agents(); ++m) {
    eps = std::max(eps, gaps[m] / phi(spec.horizon, spec.betas[m]));
  }
  return eps;
}

RegretLedger::RegretLedger(EquilibriumKind kind_, std::vector<double> betas_,
                           int horizon_)
    : kind(kind_),
      betas(std::move(betas_)),
      horizon(horizon_),
      agent_cum(betas.size(), 0.0) {}

RegretRow& accumulate(RegretLedger& ledger, int episode,
                      const std::vector<double>& gaps, int weight) {
  if (gaps.size() != ledger.betas.size()) {
    throw ParameterError("gap vector length does not match agent count");
  }
  if (weight < 1) throw ParameterError("row weight must be >= 1");
  RegretRow row;
  row.episode = episode + weight - 1;
  row.weight = weight;
  row.gaps = gaps;
  row.naive_inc = -std::numeric_limits<double>::infinity();
  row.balanced_inc = -std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < gaps.size(); ++m) {
    const double normalized = gaps[m] / phi(ledger.horizon, ledger.betas[m]);
    row.naive_inc = std::max(row.naive_inc, gaps[m]);
    row.balanced_inc = std::max(row.balanced_inc, normalized);
    ledger.agent_cum[m] += weight * normalized;
  }
  ledger.naive_cum += weight * row.naive_inc;
  ledger.balanced_cum += weight * row.balanced_inc;
  row.naive_cum = ledger.naive_cum;
  row.balanced_cum = ledger.balanced_cum;
  ledger.rows.push_back(std::move(row));
  return ledger.rows.back();
}

std::string regret_csv_header(int num_agents) {
  std::string header = "episode,kind,naive_inc,balanced_inc,naive_cum,balanced_cum";
  for (int m = 1; m <= num_agents; ++m) header += ",gap_agent_" + std::to_string(m);
  header += ",eps_certified,delta_v\n";
  return header;
}

namespace {

void append_number(std::string& out, double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  out += buf;
}

}  // namespace

std::string ledger_to_csv(const RegretLedger& ledger) {
  std::string out = regret_csv_header(static_cast<int>(ledger.betas.size()));
  const std::string kind = to_string(ledger.kind);
  for (const auto& row : ledger.rows) {
    out += std::to_string(row.episode);
    out += ',';
    out += kind;
    for (double v : {row.naive_inc, row.balanced_inc, row.naive_cum, row.balanced_cum}) {
      out += ',';
      append_number(out, v);
    }
    for (double g : row.gaps) {
      out += ',';
      append_number(out, g);
    }
    out += ',';
    if (row.eps_certified) append_number(out, *row.eps_certified);
    out += ',';
    if (row.delta_v) append_number(out, *row.delta_v);
    out += '\n';
  }
  return out;
}

}  // namespace marsgames
