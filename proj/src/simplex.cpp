#include "marsgames/simplex.hpp"

#include <cmath>
#include <limits>

#include "marsgames/errors.hpp"

namespace marsgames {

namespace {

class Tableau {
 public:
  Tableau(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * (cols + 1), 0.0) {}

  double& at(int i, int j) { return data_[static_cast<size_t>(i) * (cols_ + 1) + j]; }
  double at(int i, int j) const {
    return data_[static_cast<size_t>(i) * (cols_ + 1) + j];
  }
  double& rhs(int i) { return at(i, cols_); }
  double rhs(int i) const { return at(i, cols_); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void pivot(int r, int c, std::vector<double>& reduced, double& objective) {
    const double inv = 1.0 / at(r, c);
    for (int j = 0; j <= cols_; ++j) at(r, j) *= inv;
    at(r, c) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
    const double f = reduced[c];
    if (f != 0.0) {
      for (int j = 0; j < cols_; ++j) reduced[j] -= f * at(r, j);
      objective += f * rhs(r);
      reduced[c] = 0.0;
    }
  }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

enum class Outcome { kOptimal, kUnbounded, kIterationLimit };

// Maximizes with reduced costs `reduced` (entering when > tol). Columns at or
// beyond `barred_from` never enter.
Outcome iterate(Tableau& t, std::vector<int>& basis, std::vector<double>& reduced,
                double& objective, int barred_from, const LpOptions& options,
                int& iterations) {
  const double tol = options.tolerance;
  while (true) {
    int enter = -1;
    for (int j = 0; j < barred_from; ++j) {
      if (reduced[j] > tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Outcome::kOptimal;
    if (iterations >= options.max_iterations) return Outcome::kIterationLimit;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.rows(); ++i) {
      const double coef = t.at(i, enter);
      if (coef <= tol) continue;
      const double ratio = t.rhs(i) / coef;
      if (leave < 0 || ratio < best_ratio - tol ||
          (ratio <= best_ratio + tol && basis[i] < basis[leave])) {
        if (ratio < best_ratio) best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) return Outcome::kUnbounded;
    t.pivot(leave, enter, reduced, objective);
    basis[leave] = enter;
    ++iterations;
  }
}

}  // namespace

LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options) {
  const int n = static_cast<int>(lp.objective.size());
  const int m = static_cast<int>(lp.constraints.size());
  for (const auto& row : lp.constraints) {
    if (static_cast<int>(row.coefficients.size()) != n) {
      throw ParameterError("constraint width does not match objective");
    }
  }

  // Orient each row so its right-hand side is nonnegative.
  std::vector<ConstraintSense> sense(m);
  std::vector<double> sign(m, 1.0);
  int slack_count = 0, artificial_count = 0;
  for (int i = 0; i < m; ++i) {
    sense[i] = lp.constraints[i].sense;
    if (lp.constraints[i].rhs < 0) {
      sign[i] = -1.0;
      if (sense[i] == ConstraintSense::kLessEqual) {
        sense[i] = ConstraintSense::kGreaterEqual;
      } else if (sense[i] == ConstraintSense::kGreaterEqual) {
        sense[i] = ConstraintSense::kLessEqual;
      }
    }
    if (sense[i] != ConstraintSense::kEqual) ++slack_count;
    if (sense[i] != ConstraintSense::kLessEqual) ++artificial_count;
  }

  const int first_artificial = n + slack_count;
  const int cols = first_artificial + artificial_count;
  Tableau t(m, cols);
  std::vector<int> basis(m, -1);
  int next_slack = n, next_artificial = first_artificial;
  for (int i = 0; i < m; ++i) {
    const auto& row = lp.constraints[i];
    for (int j = 0; j < n; ++j) t.at(i, j) = sign[i] * row.coefficients[j];
    t.rhs(i) = sign[i] * row.rhs;
    if (sense[i] == ConstraintSense::kLessEqual) {
      t.at(i, next_slack) = 1.0;
      basis[i] = next_slack++;
    } else {
      if (sense[i] == ConstraintSense::kGreaterEqual) t.at(i, next_slack++) = -1.0;
      t.at(i, next_artificial) = 1.0;
      basis[i] = next_artificial++;
    }
  }

  int iterations = 0;
  auto fail = [&](Outcome outcome, const char* phase) {
    if (outcome == Outcome::kUnbounded) {
      throw SolverFailure(SolverFailure::Reason::kUnbounded,
                          std::string("LP is unbounded (") + phase + ")");
    }
    throw SolverFailure(SolverFailure::Reason::kIterationLimit,
                        std::string("simplex iteration limit reached (") + phase + ")");
  };

  // Phase 1: maximize -sum(artificials).
  if (artificial_count > 0) {
    std::vector<double> reduced(cols, 0.0);
    double objective = 0.0;
    for (int i = 0; i < m; ++i) {
      if (basis[i] < first_artificial) continue;
      for (int j = 0; j < first_artificial; ++j) reduced[j] += t.at(i, j);
      objective -= t.rhs(i);
    }
    const Outcome outcome = iterate(t, basis, reduced, objective, first_artificial,
                                    options, iterations);
    if (outcome != Outcome::kOptimal) fail(outcome, "phase 1");
    double scale = 1.0;
    for (const auto& row : lp.constraints) scale = std::max(scale, std::abs(row.rhs));
    if (-objective > 1e-9 * scale) {
      throw SolverFailure(SolverFailure::Reason::kInfeasible, "LP is infeasible");
    }
    // Pivot remaining zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (basis[i] < first_artificial) continue;
      int c = -1;
      double best = options.tolerance;
      for (int j = 0; j < first_artificial; ++j) {
        if (std::abs(t.at(i, j)) > best) {
          best = std::abs(t.at(i, j));
          c = j;
        }
      }
      if (c >= 0) {
        t.pivot(i, c, reduced, objective);
        basis[i] = c;
      }
    }
  }

  // Phase 2.
  std::vector<double> reduced(cols, 0.0);
  double objective = 0.0;
  for (int j = 0; j < n; ++j) reduced[j] = lp.objective[j];
  for (int i = 0; i < m; ++i) {
    const int b = basis[i];
    if (b >= n) continue;
    const double cb = lp.objective[b];
    if (cb == 0.0) continue;
    for (int j = 0; j < cols; ++j) reduced[j] -= cb * t.at(i, j);
    objective += cb * t.rhs(i);
  }
  const Outcome outcome =
      iterate(t, basis, reduced, objective, first_artificial, options, iterations);
  if (outcome != Outcome::kOptimal) fail(outcome, "phase 2");

  LpSolution out;
  out.iterations = iterations;
  out.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = std::max(0.0, t.rhs(i));
  }
  out.objective = 0.0;
  for (int j = 0; j < n; ++j) out.objective += lp.objective[j] * out.x[j];
  for (const auto& row : lp.constraints) {
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) lhs += row.coefficients[j] * out.x[j];
    double violation = 0.0;
    switch (row.sense) {
      case ConstraintSense::kLessEqual: violation = lhs - row.rhs; break;
      case ConstraintSense::kGreaterEqual: violation = row.rhs - lhs; break;
      case ConstraintSense::kEqual: violation = std::abs(lhs - row.rhs); break;
    }
    out.max_residual = std::max(out.max_residual, violation);
  }
  return out;
}

}  // namespace marsgames
