#include "marsgames/eq_solvers.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "marsgames/errors.hpp"
#include "marsgames/simplex.hpp"

namespace marsgames {

std::string to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::kNE: return "ne";
    case EquilibriumKind::kCE: return "ce";
    case EquilibriumKind::kCCE: return "cce";
  }
  return "?";
}

EquilibriumKind parse_equilibrium_kind(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "ne") return EquilibriumKind::kNE;
  if (lower == "ce") return EquilibriumKind::kCE;
  if (lower == "cce") return EquilibriumKind::kCCE;
  throw ParseError("unknown equilibrium kind '" + text + "' (expected ne, ce or cce)");
}

GameMatrix::GameMatrix(std::vector<int> action_sizes)
    : space(std::move(action_sizes)),
      payoffs(space.num_agents(), std::vector<double>(space.joint_size(), 0.0)) {}

namespace {

void check_game(const GameMatrix& game) {
  if (game.num_agents() < 1) throw ParameterError("game needs at least one agent");
  if (static_cast<int>(game.payoffs.size()) != game.num_agents()) {
    throw ParameterError("payoff tensor count does not match agent count");
  }
  for (const auto& u : game.payoffs) {
    if (static_cast<int>(u.size()) != game.space.joint_size()) {
      throw ParameterError("payoff tensor has wrong size");
    }
    for (double v : u) {
      if (!std::isfinite(v)) throw ParameterError("payoffs must be finite");
    }
  }
}

// Gain of agent m from always playing b instead of its part of x.
double fixed_deviation_gain(const GameMatrix& game, const std::vector<double>& x,
                            int m, int b) {
  double gain = 0.0;
  for (int a = 0; a < game.space.joint_size(); ++a) {
    if (x[a] == 0.0) continue;
    gain += x[a] * (game.payoff(m, game.space.with_own(a, m, b)) - game.payoff(m, a));
  }
  return gain;
}

// Gain of agent m from replacing recommendation rec by b.
double swap_gain(const GameMatrix& game, const std::vector<double>& x, int m,
                 int rec, int b) {
  const auto& space = game.space;
  double gain = 0.0;
  for (int o = 0; o < space.others_size(m); ++o) {
    const int a = space.combine(m, rec, o);
    if (x[a] == 0.0) continue;
    gain += x[a] * (game.payoff(m, space.combine(m, b, o)) - game.payoff(m, a));
  }
  return gain;
}

double payoff_range(const std::vector<double>& u) {
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return *hi - *lo;
}

std::vector<double> clean_distribution(std::vector<double> x) {
  double total = 0.0;
  for (double& p : x) {
    if (p < 0.0) p = 0.0;
    total += p;
  }
  if (total <= 0.0) throw SolverFailure(SolverFailure::Reason::kInfeasible,
                                        "solver returned an empty distribution");
  for (double& p : x) p /= total;
  return x;
}

// Welfare objective with each agent's payoffs shifted to start at zero and
// all agents divided by a common scale; the argmax set is unchanged.
std::vector<double> welfare_objective(const GameMatrix& game) {
  const int A = game.space.joint_size();
  std::vector<double> objective(A, 0.0);
  double scale = 0.0;
  for (const auto& u : game.payoffs) scale = std::max(scale, payoff_range(u));
  if (scale == 0.0) return objective;
  for (const auto& u : game.payoffs) {
    const double lo = *std::min_element(u.begin(), u.end());
    for (int a = 0; a < A; ++a) objective[a] += (u[a] - lo) / scale;
  }
  return objective;
}

LinearConstraint simplex_row(int A) {
  LinearConstraint row;
  row.coefficients.assign(A, 1.0);
  row.sense = ConstraintSense::kEqual;
  row.rhs = 1.0;
  return row;
}

EquilibriumDist finish(const GameMatrix& game, std::vector<double> x,
                       EquilibriumKind kind) {
  EquilibriumDist out;
  out.probs = clean_distribution(std::move(x));
  out.kind = kind;
  out.max_violation = verify(game, out.probs, kind);
  return out;
}

}  // namespace

double verify(const GameMatrix& game, const std::vector<double>& x,
              EquilibriumKind kind) {
  check_game(game);
  const auto& space = game.space;
  if (static_cast<int>(x.size()) != space.joint_size()) {
    throw ParameterError("distribution has wrong size");
  }
  double worst = 0.0;
  switch (kind) {
    case EquilibriumKind::kCCE:
      for (int m = 0; m < game.num_agents(); ++m) {
        for (int b = 0; b < space.size(m); ++b) {
          worst = std::max(worst, fixed_deviation_gain(game, x, m, b));
        }
      }
      break;
    case EquilibriumKind::kCE:
      for (int m = 0; m < game.num_agents(); ++m) {
        double total = 0.0;
        for (int rec = 0; rec < space.size(m); ++rec) {
          double best = 0.0;
          for (int b = 0; b < space.size(m); ++b) {
            best = std::max(best, swap_gain(game, x, m, rec, b));
          }
          total += best;
        }
        worst = std::max(worst, total);
      }
      break;
    case EquilibriumKind::kNE: {
      std::vector<std::vector<double>> marginals(game.num_agents());
      for (int m = 0; m < game.num_agents(); ++m) {
        marginals[m].assign(space.size(m), 0.0);
        for (int a = 0; a < space.joint_size(); ++a) {
          marginals[m][space.own_action(a, m)] += x[a];
        }
      }
      const auto product = product_of(space, marginals);
      for (int m = 0; m < game.num_agents(); ++m) {
        for (int b = 0; b < space.size(m); ++b) {
          worst = std::max(worst, fixed_deviation_gain(game, product, m, b));
        }
      }
      break;
    }
  }
  return worst;
}

EquilibriumDist solve_cce(const GameMatrix& game) {
  check_game(game);
  const auto& space = game.space;
  const int A = space.joint_size();
  LinearProgram lp;
  lp.objective = welfare_objective(game);
  lp.constraints.push_back(simplex_row(A));
  for (int m = 0; m < game.num_agents(); ++m) {
    const double scale = payoff_range(game.payoffs[m]);
    if (scale == 0.0) continue;
    for (int b = 0; b < space.size(m); ++b) {
      LinearConstraint row;
      row.coefficients.resize(A);
      for (int a = 0; a < A; ++a) {
        row.coefficients[a] =
            (game.payoff(m, space.with_own(a, m, b)) - game.payoff(m, a)) / scale;
      }
      lp.constraints.push_back(std::move(row));
    }
  }
  return finish(game, lp_solve(lp).x, EquilibriumKind::kCCE);
}

EquilibriumDist solve_ce(const GameMatrix& game) {
  check_game(game);
  const auto& space = game.space;
  const int A = space.joint_size();
  LinearProgram lp;
  lp.objective = welfare_objective(game);
  lp.constraints.push_back(simplex_row(A));
  for (int m = 0; m < game.num_agents(); ++m) {
    const double scale = payoff_range(game.payoffs[m]);
    if (scale == 0.0) continue;
    for (int rec = 0; rec < space.size(m); ++rec) {
      for (int b = 0; b < space.size(m); ++b) {
        if (b == rec) continue;
        LinearConstraint row;
        row.coefficients.assign(A, 0.0);
        for (int o = 0; o < space.others_size(m); ++o) {
          const int a = space.combine(m, rec, o);
          row.coefficients[a] =
              (game.payoff(m, space.combine(m, b, o)) - game.payoff(m, a)) / scale;
        }
        lp.constraints.push_back(std::move(row));
      }
    }
  }
  return finish(game, lp_solve(lp).x, EquilibriumKind::kCE);
}

namespace {

constexpr int kMaxPureSearch = 64;
constexpr int kMaxSupportActions = 8;

// Mixed strategy of the column player over `support` making every row in
// `best_rows` a best response of the row player with payoff matrix rows.
// payoff(i, j) is the row player's payoff. Returns empty when infeasible.
std::vector<double> indifference_strategy(
    int rows, int cols, const std::vector<double>& payoff, unsigned best_rows,
    unsigned support) {
  double lo = payoff.empty() ? 0.0 : *std::min_element(payoff.begin(), payoff.end());
  double hi = payoff.empty() ? 0.0 : *std::max_element(payoff.begin(), payoff.end());
  const double scale = hi > lo ? hi - lo : 1.0;
  std::vector<int> vars;
  for (int j = 0; j < cols; ++j) {
    if (support & (1u << j)) vars.push_back(j);
  }
  const int n = static_cast<int>(vars.size()) + 1;  // last variable is the value
  LinearProgram lp;
  lp.objective.assign(n, 0.0);
  LinearConstraint total;
  total.coefficients.assign(n, 1.0);
  total.coefficients.back() = 0.0;
  total.sense = ConstraintSense::kEqual;
  total.rhs = 1.0;
  lp.constraints.push_back(total);
  for (int i = 0; i < rows; ++i) {
    LinearConstraint row;
    row.coefficients.resize(n);
    for (size_t k = 0; k < vars.size(); ++k) {
      // Shifted to [1, 2] so the value variable stays positive.
      row.coefficients[k] = 1.0 + (payoff[i * cols + vars[k]] - lo) / scale;
    }
    row.coefficients.back() = -1.0;
    row.sense = (best_rows & (1u << i)) ? ConstraintSense::kEqual
                                        : ConstraintSense::kLessEqual;
    lp.constraints.push_back(std::move(row));
  }
  try {
    const auto sol = lp_solve(lp);
    if (sol.max_residual > 1e-10) return {};
    std::vector<double> y(cols, 0.0);
    for (size_t k = 0; k < vars.size(); ++k) y[vars[k]] = sol.x[k];
    return y;
  } catch (const SolverFailure&) {
    return {};
  }
}

std::vector<double> support_enumeration(const GameMatrix& game) {
  const auto& space = game.space;
  const int n0 = space.size(0), n1 = space.size(1);
  // Row player's payoff u_0(i, j) and column player's payoff u_1 transposed.
  std::vector<double> row_payoff(n0 * n1), col_payoff(n1 * n0);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const int a = i * space.stride(0) + j * space.stride(1);
      row_payoff[i * n1 + j] = game.payoff(0, a);
      col_payoff[j * n0 + i] = game.payoff(1, a);
    }
  }
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned I = 1; I < (1u << n0); ++I) {
    for (unsigned J = 1; J < (1u << n1); ++J) pairs.emplace_back(I, J);
  }
  // Equal-size supports first (sufficient for nondegenerate games), then by
  // total size.
  std::stable_sort(pairs.begin(), pairs.end(), [](auto l, auto r) {
    const int lu = std::popcount(l.first) != std::popcount(l.second);
    const int ru = std::popcount(r.first) != std::popcount(r.second);
    if (lu != ru) return lu < ru;
    return std::popcount(l.first) + std::popcount(l.second) <
           std::popcount(r.first) + std::popcount(r.second);
  });
  for (const auto& [I, J] : pairs) {
    const auto y = indifference_strategy(n0, n1, row_payoff, I, J);
    if (y.empty()) continue;
    const auto x = indifference_strategy(n1, n0, col_payoff, J, I);
    if (x.empty()) continue;
    auto joint = product_of(space, {clean_distribution(x), clean_distribution(y)});
    if (verify(game, joint, EquilibriumKind::kNE) <= 1e-8) return joint;
  }
  return {};
}

}  // namespace

EquilibriumDist solve_ne(const GameMatrix& game) {
  check_game(game);
  const auto& space = game.space;
  const int A = space.joint_size();
  if (A <= kMaxPureSearch) {
    int best = -1;
    double best_welfare = 0.0;
    for (int a = 0; a < A; ++a) {
      bool stable = true;
      for (int m = 0; m < game.num_agents() && stable; ++m) {
        for (int b = 0; b < space.size(m); ++b) {
          if (game.payoff(m, space.with_own(a, m, b)) > game.payoff(m, a)) {
            stable = false;
            break;
          }
        }
      }
      if (!stable) continue;
      double welfare = 0.0;
      for (int m = 0; m < game.num_agents(); ++m) welfare += game.payoff(m, a);
      if (best < 0 || welfare > best_welfare) {
        best = a;
        best_welfare = welfare;
      }
    }
    if (best >= 0) {
      std::vector<double> x(A, 0.0);
      x[best] = 1.0;
      return finish(game, std::move(x), EquilibriumKind::kNE);
    }
  }
  if (game.num_agents() == 2 && space.size(0) <= kMaxSupportActions &&
      space.size(1) <= kMaxSupportActions) {
    auto x = support_enumeration(game);
    if (!x.empty()) return finish(game, std::move(x), EquilibriumKind::kNE);
    throw SolverFailure(SolverFailure::Reason::kInfeasible,
                        "support enumeration found no Nash equilibrium");
  }
  throw SolverFailure(SolverFailure::Reason::kUnsupported,
                      "Nash solver supports pure search (joint size <= 64) and "
                      "two-agent support enumeration (<= 8 actions each) only");
}

EquilibriumDist solve_equilibrium(const GameMatrix& game, EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::kNE: return solve_ne(game);
    case EquilibriumKind::kCE: return solve_ce(game);
    case EquilibriumKind::kCCE: return solve_cce(game);
  }
  throw ParameterError("unknown equilibrium kind");
}

}  // namespace marsgames
