#include "npiv/approx.hpp"

#include "npiv/error.hpp"
#include "npiv/lpsolve.hpp"

#include <cmath>

namespace npiv {

SupApproximation constrained_sup_approx(std::span<const double> target, const BSplineBasis& basis,
                                        const ShapeSpec& shape, std::span<const double> fit_grid) {
  if (target.size() != fit_grid.size()) {
    throw InputError("target values and fit grid differ in length");
  }
  if (fit_grid.empty()) throw InputError("fit grid is empty");
  for (double v : target) {
    if (!std::isfinite(v)) throw InputError("target values must be finite");
  }

  const int k = basis.dimension();
  const auto n = static_cast<Eigen::Index>(fit_grid.size());
  // Variables (beta, t): |Phi(x)'beta - target(x)| <= t on the grid.
  Constraints fit(Eigen::MatrixXd::Zero(2 * n, k + 1), Eigen::VectorXd::Zero(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd phi = basis.eval(fit_grid[i]);
    fit.lhs.row(2 * i).head(k) = phi.transpose();
    fit.lhs(2 * i, k) = -1.0;
    fit.rhs[2 * i] = target[i];
    fit.lhs.row(2 * i + 1).head(k) = -phi.transpose();
    fit.lhs(2 * i + 1, k) = -1.0;
    fit.rhs[2 * i + 1] = -target[i];
  }
  const Constraints shape_rows = materialize_rows(shape, basis, fit_grid);
  Constraints shaped(Eigen::MatrixXd::Zero(shape_rows.num_rows(), k + 1), shape_rows.rhs);
  shaped.lhs.leftCols(k) = shape_rows.lhs;
  fit.append(shaped);

  Eigen::VectorXd objective = Eigen::VectorXd::Zero(k + 1);
  objective[k] = 1.0;
  const LPResult res = solve(fit, objective, Sense::minimize);
  if (res.status == LPStatus::infeasible) {
    throw InfeasibleError("shape restrictions are mutually contradictory on the fit grid");
  }
  if (res.status != LPStatus::optimal) {
    throw SolverError("sup-norm approximation LP did not reach an optimum");
  }
  return {res.solution.head(k), std::max(0.0, res.value)};
}

}  // namespace npiv
