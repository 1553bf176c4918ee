#pragma once

#include "npiv/execution.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace npiv {

/// Linear inequalities lhs * beta <= rhs over free variables beta.
struct Constraints {
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;

  Constraints() = default;
  explicit Constraints(int num_vars) : lhs(0, num_vars), rhs(0) {}
  Constraints(Eigen::MatrixXd a, Eigen::VectorXd r);

  int num_rows() const { return static_cast<int>(lhs.rows()); }
  int num_vars() const { return static_cast<int>(lhs.cols()); }

  void append(const Constraints& other);
  /// Largest violation max_j (a_j' beta - r_j) / (1 + |r_j|), clipped at zero.
  double max_scaled_violation(const Eigen::VectorXd& beta) const;
};

enum class Sense { maximize, minimize };
enum class LPStatus { optimal, infeasible, unbounded };

const char* to_string(LPStatus status);

struct LinearProgram {
  Eigen::VectorXd objective;
  Sense sense = Sense::maximize;
  Constraints constraints;
};

struct LPResult {
  LPStatus status = LPStatus::infeasible;
  double value = 0.0;
  /// Optimal beta (empty unless optimal).
  Eigen::VectorXd solution;
  /// Nonnegative multipliers of the inequality rows (empty unless optimal).
  Eigen::VectorXd duals;
  /// Farkas certificate y >= 0 with y'A = 0 and y'r < 0 (empty unless infeasible).
  Eigen::VectorXd certificate;
  int iterations = 0;
};

struct LPTolerances {
  double feasibility = 1e-7;
  double optimality = 1e-8;
  /// Candidate pivots at or below this magnitude are treated as zero.
  double pivot = 1e-12;
  /// Pivots before Bland's rule replaces Dantzig pricing, as a multiple of (m + k).
  int bland_after_factor = 10;
  /// Hard iteration cap, as a multiple of (m + k); exceeding it is a solver failure.
  int max_iter_factor = 100;
};

LPResult solve(const LinearProgram& lp, const LPTolerances& tol = {});
LPResult solve(const Constraints& constraints, const Eigen::VectorXd& objective, Sense sense,
               const LPTolerances& tol = {});

/// Solves one LP per objective over a shared constraint set. Results are
/// identical to independent `solve` calls regardless of the execution mode.
std::vector<LPResult> solve_many(const Constraints& constraints,
                                 std::span<const Eigen::VectorXd> objectives, Sense sense,
                                 Execution exec = Execution::parallel,
                                 const LPTolerances& tol = {});

struct FeasibilityResult {
  bool feasible = false;
  /// Smallest uniform relaxation t >= 0 making lhs * beta <= rhs + t feasible.
  double min_relaxation = 0.0;
  Eigen::VectorXd point;
  Eigen::VectorXd certificate;
};

/// Phase-one check of the constraint set alone.
FeasibilityResult check_feasibility(const Constraints& constraints, const LPTolerances& tol = {});

}  // namespace npiv
