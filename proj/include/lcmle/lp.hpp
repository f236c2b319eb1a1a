#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace lcmle {

// maximize objective·x  subject to  constraints·x = rhs,  x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd rhs;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd solution;  // basic feasible solution (Optimal only)
  double value = 0.0;
  std::vector<int> basis;    // basic column per row; -1 marks a redundant row
  Eigen::VectorXd duals;     // constraints^T duals >= objective, rhs·duals = value

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct LpTolerances {
  double feasibility = 1e-9;  // relative to 1 + |rhs|_inf
  double pivot = 1e-11;
  double optimality = 1e-10;
  double clamp = 1e-12;       // negatives in [-clamp, 0) are reported as 0
  int iteration_factor = 50;  // cap = factor * (rows + cols) per phase
};

// Dense two-phase tableau simplex with Bland's rule.
LpOutcome solve(const LinearProgram& lp, const LpTolerances& tol = {});

// Same program with the listed variables pinned to zero.
LpOutcome fixed_basis_resolve(const LinearProgram& lp, std::span<const int> forbidden,
                              const LpTolerances& tol = {});

}  // namespace lcmle
