#include "npiv/lpsolve.hpp"

#include "npiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace npiv {

Constraints::Constraints(Eigen::MatrixXd a, Eigen::VectorXd r) : lhs(std::move(a)), rhs(std::move(r)) {
  if (lhs.rows() != rhs.size()) {
    throw InputError("constraint matrix has " + std::to_string(lhs.rows()) +
                     " rows but the right-hand side has " + std::to_string(rhs.size()));
  }
}

void Constraints::append(const Constraints& other) {
  if (num_rows() > 0 && other.num_vars() != num_vars()) {
    throw InputError("cannot append constraints over a different number of variables");
  }
  if (num_rows() == 0 && lhs.cols() == 0) lhs.resize(0, other.num_vars());
  const auto old = lhs.rows();
  lhs.conservativeResize(old + other.lhs.rows(), other.num_vars());
  lhs.bottomRows(other.lhs.rows()) = other.lhs;
  rhs.conservativeResize(old + other.rhs.size());
  rhs.tail(other.rhs.size()) = other.rhs;
}

double Constraints::max_scaled_violation(const Eigen::VectorXd& beta) const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < lhs.rows(); ++j) {
    const double excess = (lhs.row(j).dot(beta) - rhs[j]) / (1.0 + std::abs(rhs[j]));
    worst = std::max(worst, excess);
  }
  return worst;
}

const char* to_string(LPStatus status) {
  switch (status) {
    case LPStatus::optimal: return "optimal";
    case LPStatus::infeasible: return "infeasible";
    case LPStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

// The primal problem  max c'b  s.t.  A b <= r  (b free)  is solved through its
// dual  min r'y  s.t.  A'y = c, y >= 0  with a two-phase tableau simplex. The
// dual has only k equality rows, so the tableau is (k + 2) x (m + k + 1) and
// each pivot is cheap even with hundreds of primal inequalities.
enum class DualOutcome { optimal, unbounded, infeasible };

struct DualSolution {
  DualOutcome outcome = DualOutcome::infeasible;
  Eigen::VectorXd beta;
  Eigen::VectorXd y;
  Eigen::VectorXd ray;
  int iterations = 0;
};

class DualTableau {
 public:
  DualTableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& r, const Eigen::VectorXd& c,
              const LPTolerances& tol)
      : a_(a), r_(r), tol_(tol), m_(static_cast<int>(a.rows())), k_(static_cast<int>(a.cols())),
        width_(m_ + k_ + 1), rhs_col_(m_ + k_), cost_row_(k_), phase1_row_(k_ + 1),
        tab_(static_cast<size_t>(k_ + 2) * width_, 0.0), basis_(k_), sign_(k_) {
    for (int i = 0; i < k_; ++i) {
      sign_[i] = c[i] < 0 ? -1.0 : 1.0;
      for (int j = 0; j < m_; ++j) cell(i, j) = sign_[i] * a(j, i);
      cell(i, m_ + i) = 1.0;
      cell(i, rhs_col_) = sign_[i] * c[i];
      basis_[i] = m_ + i;
    }
    for (int j = 0; j < m_; ++j) {
      cell(cost_row_, j) = r[j];
      double sum = 0.0;
      for (int i = 0; i < k_; ++i) sum += cell(i, j);
      cell(phase1_row_, j) = -sum;
    }
    double rhs_sum = 0.0;
    for (int i = 0; i < k_; ++i) rhs_sum += cell(i, rhs_col_);
    cell(phase1_row_, rhs_col_) = -rhs_sum;
    c_scale_ = 1.0 + c.lpNorm<Eigen::Infinity>();
    max_iter_ = tol.max_iter_factor * (m_ + k_);
  }

  DualSolution run() {
    DualSolution out;
    int entering = -1;
    if (!iterate(phase1_row_, entering, true)) {
      throw SolverError("phase one of the simplex reported an unbounded auxiliary problem");
    }
    const double infeasibility = -cell(phase1_row_, rhs_col_);
    out.iterations = iterations_;
    if (infeasibility > 1e-8 * c_scale_) {
      out.outcome = DualOutcome::infeasible;
      return out;
    }
    drive_out_artificials();
    const bool bounded = iterate(cost_row_, entering);
    out.iterations = iterations_;
    if (!bounded) {
      out.outcome = DualOutcome::unbounded;
      out.ray = Eigen::VectorXd::Zero(m_);
      out.ray[entering] = 1.0;
      for (int i = 0; i < k_; ++i) {
        if (basis_[i] < m_) out.ray[basis_[i]] = std::max(0.0, -cell(i, entering));
      }
      return out;
    }
    out.outcome = DualOutcome::optimal;
    out.y = Eigen::VectorXd::Zero(m_);
    Eigen::MatrixXd active(k_, k_);
    Eigen::VectorXd active_rhs(k_);
    for (int i = 0; i < k_; ++i) {
      const int q = basis_[i];
      if (q < m_) {
        out.y[q] = std::max(0.0, cell(i, rhs_col_));
        active.row(i) = a_.row(q);
        active_rhs[i] = r_[q];
      } else {
        active.row(i).setZero();
        active(i, q - m_) = 1.0;
        active_rhs[i] = 0.0;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(active);
    if (!lu.isInvertible()) throw SolverError("final simplex basis is numerically singular");
    out.beta = lu.solve(active_rhs);
    return out;
  }

 private:
  double& cell(int row, int col) { return tab_[static_cast<size_t>(row) * width_ + col]; }

  void pivot(int pr, int pc) {
    double* prow = &tab_[static_cast<size_t>(pr) * width_];
    const double inv = 1.0 / prow[pc];
    for (int j = 0; j < width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (int i = 0; i < k_ + 2; ++i) {
      if (i == pr) continue;
      double* row = &tab_[static_cast<size_t>(i) * width_];
      const double factor = row[pc];
      if (factor == 0.0) continue;
      for (int j = 0; j < width_; ++j) row[j] -= factor * prow[j];
      row[pc] = 0.0;
    }
    basis_[pr] = pc;
    ++iterations_;
    if (iterations_ > max_iter_) {
      throw SolverError("simplex iteration limit of " + std::to_string(max_iter_) +
                        " exceeded (cycling guard)");
    }
  }

  // Returns false if the objective is unbounded below along column `entering`.
  // The phase-one objective is bounded below, so there a column without a
  // pivot row only carries roundoff in its reduced cost and is skipped.
  bool iterate(int obj_row, int& entering, bool phase_one = false) {
    const int bland_after = tol_.bland_after_factor * (m_ + k_);
    int phase_pivots = 0;
    std::vector<char> skipped(phase_one ? m_ : 0, 0);
    for (;;) {
      const bool bland = phase_pivots >= bland_after;
      int pc = -1;
      double best = -tol_.optimality;
      for (int j = 0; j < m_; ++j) {
        if (phase_one && skipped[j]) continue;
        const double d = cell(obj_row, j);
        if (d < best) {
          pc = j;
          if (bland) break;
          best = d;
        }
      }
      if (pc < 0) return true;

      int pr = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_pivot = 0.0;
      for (int i = 0; i < k_; ++i) {
        const double entry = cell(i, pc);
        if (entry <= tol_.pivot) continue;
        const double ratio = std::max(0.0, cell(i, rhs_col_)) / entry;
        bool take = false;
        if (pr < 0 || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
          take = bland ? basis_[i] < basis_[pr] : entry > best_pivot;
        }
        if (take) {
          best_ratio = pr < 0 ? ratio : std::min(best_ratio, ratio);
          pr = i;
          best_pivot = entry;
        }
      }
      if (pr < 0) {
        if (phase_one) {
          skipped[pc] = 1;
          continue;
        }
        entering = pc;
        return false;
      }
      pivot(pr, pc);
      ++phase_pivots;
      if (phase_one) std::fill(skipped.begin(), skipped.end(), 0);
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < k_; ++i) {
      if (basis_[i] < m_) continue;
      int best = -1;
      double best_abs = 1e-9;
      for (int j = 0; j < m_; ++j) {
        const double v = std::abs(cell(i, j));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best < 0) continue;  // redundant equality row; the artificial stays at zero
      cell(i, rhs_col_) = 0.0;
      pivot(i, best);
    }
  }

  const Eigen::MatrixXd& a_;
  const Eigen::VectorXd& r_;
  LPTolerances tol_;
  int m_;
  int k_;
  int width_;
  int rhs_col_;
  int cost_row_;
  int phase1_row_;
  std::vector<double> tab_;
  std::vector<int> basis_;
  std::vector<double> sign_;
  double c_scale_ = 1.0;
  int iterations_ = 0;
  int max_iter_ = 0;
};

// Rows are rescaled to unit infinity norm before solving; the feasible set is unchanged.
struct ScaledConstraints {
  Eigen::MatrixXd a;
  Eigen::VectorXd r;
  Eigen::VectorXd scale;
};

ScaledConstraints scale_rows(const Constraints& cons) {
  ScaledConstraints out{cons.lhs, cons.rhs, Eigen::VectorXd::Ones(cons.num_rows())};
  for (int j = 0; j < cons.num_rows(); ++j) {
    const double s = cons.lhs.row(j).lpNorm<Eigen::Infinity>();
    if (s > 0.0) {
      out.scale[j] = s;
      out.a.row(j) /= s;
      out.r[j] /= s;
    }
  }
  return out;
}

void check_finite(const Constraints& cons, const Eigen::VectorXd* objective) {
  if (cons.num_vars() < 1) throw InputError("linear program needs at least one variable");
  if (cons.lhs.rows() != cons.rhs.size()) throw InputError("constraint dimensions are inconsistent");
  if (!cons.lhs.allFinite() || !cons.rhs.allFinite()) {
    throw InputError("linear program constraints contain non-finite entries");
  }
  if (objective != nullptr) {
    if (objective->size() != cons.num_vars()) {
      throw InputError("objective length " + std::to_string(objective->size()) +
                       " does not match " + std::to_string(cons.num_vars()) + " variables");
    }
    if (!objective->allFinite()) throw InputError("objective contains non-finite entries");
  }
}

Eigen::VectorXd unscale_multipliers(const Eigen::VectorXd& y, const Eigen::VectorXd& scale) {
  return y.cwiseQuotient(scale);
}

FeasibilityResult feasibility_impl(const Constraints& cons, const LPTolerances& tol) {
  const int m = cons.num_rows();
  const int k = cons.num_vars();
  // max -t  s.t.  A b - t <= r,  -t <= 0
  Constraints relaxed(Eigen::MatrixXd::Zero(m + 1, k + 1), Eigen::VectorXd::Zero(m + 1));
  relaxed.lhs.topLeftCorner(m, k) = cons.lhs;
  relaxed.lhs.col(k).setConstant(-1.0);
  relaxed.rhs.head(m) = cons.rhs;
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(k + 1);
  objective[k] = -1.0;

  const auto scaled = scale_rows(relaxed);
  DualTableau tableau(scaled.a, scaled.r, objective, tol);
  const DualSolution sol = tableau.run();
  if (sol.outcome != DualOutcome::optimal) {
    throw SolverError("phase-one feasibility problem did not reach an optimum");
  }
  FeasibilityResult out;
  out.min_relaxation = std::max(0.0, sol.beta[k]);
  out.point = sol.beta.head(k);
  const double rhs_scale = 1.0 + (m > 0 ? cons.rhs.lpNorm<Eigen::Infinity>() : 0.0);
  out.feasible = out.min_relaxation <= tol.feasibility * rhs_scale;
  if (!out.feasible) {
    Eigen::VectorXd y = unscale_multipliers(sol.y, scaled.scale).head(m);
    const double total = y.sum();
    if (total > 0.0) y /= total;
    out.certificate = y;
  }
  return out;
}

}  // namespace

LPResult solve(const Constraints& constraints, const Eigen::VectorXd& objective, Sense sense,
               const LPTolerances& tol) {
  check_finite(constraints, &objective);
  const Eigen::VectorXd c = sense == Sense::maximize ? objective : Eigen::VectorXd(-objective);
  const auto scaled = scale_rows(constraints);
  DualTableau tableau(scaled.a, scaled.r, c, tol);
  const DualSolution sol = tableau.run();

  LPResult out;
  out.iterations = sol.iterations;
  switch (sol.outcome) {
    case DualOutcome::optimal: {
      out.status = LPStatus::optimal;
      out.solution = sol.beta;
      out.duals = unscale_multipliers(sol.y, scaled.scale);
      out.value = objective.dot(sol.beta);
      const double violation = constraints.max_scaled_violation(sol.beta);
      if (violation > tol.feasibility) {
        throw SolverError("simplex returned a point violating the constraints by " +
                          std::to_string(violation));
      }
      break;
    }
    case DualOutcome::unbounded: {
      out.status = LPStatus::infeasible;
      Eigen::VectorXd y = unscale_multipliers(sol.ray, scaled.scale);
      const double total = y.sum();
      if (total > 0.0) y /= total;
      out.certificate = y;
      break;
    }
    case DualOutcome::infeasible: {
      // Dual infeasible: the primal is either unbounded or infeasible.
      const FeasibilityResult feas = feasibility_impl(constraints, tol);
      if (feas.feasible) {
        out.status = LPStatus::unbounded;
        out.value = sense == Sense::maximize ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
      } else {
        out.status = LPStatus::infeasible;
        out.certificate = feas.certificate;
      }
      break;
    }
  }
  return out;
}

LPResult solve(const LinearProgram& lp, const LPTolerances& tol) {
  return solve(lp.constraints, lp.objective, lp.sense, tol);
}

std::vector<LPResult> solve_many(const Constraints& constraints,
                                 std::span<const Eigen::VectorXd> objectives, Sense sense,
                                 Execution exec, const LPTolerances& tol) {
  std::vector<LPResult> results(objectives.size());
  const auto count = static_cast<long>(objectives.size());
  // Exceptions must not escape an OpenMP region; capture the first one.
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (is_parallel(exec))
  for (long i = 0; i < count; ++i) {
    try {
      results[i] = solve(constraints, objectives[i], sense, tol);
    } catch (...) {
#pragma omp critical(npiv_solve_many_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

FeasibilityResult check_feasibility(const Constraints& constraints, const LPTolerances& tol) {
  check_finite(constraints, nullptr);
  return feasibility_impl(constraints, tol);
}

}  // namespace npiv
