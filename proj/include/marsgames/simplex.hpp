#pragma once

#include <vector>

namespace marsgames {

enum class ConstraintSense { kLessEqual, kGreaterEqual, kEqual };

struct LinearConstraint {
  std::vector<double> coefficients;
  ConstraintSense sense = ConstraintSense::kLessEqual;
  double rhs = 0.0;
};

// maximize objective . x  subject to constraints and x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<LinearConstraint> constraints;
};

struct LpOptions {
  int max_iterations = 100000;
  double tolerance = 1e-11;
};

struct LpSolution {
  std::vector<double> x;
  double objective = 0.0;
  double max_residual = 0.0;  // worst constraint violation at x
  int iterations = 0;
};

// Dense two-phase tableau simplex with Bland's rule for both the entering
// and the leaving variable, so identical inputs always reach the same
// vertex. Throws SolverFailure (kInfeasible, kUnbounded, kIterationLimit).
LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace marsgames
