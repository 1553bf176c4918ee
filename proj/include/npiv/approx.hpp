#pragma once

#include "npiv/shapes.hpp"
#include "npiv/splines.hpp"

#include <Eigen/Dense>

#include <span>

namespace npiv {

struct SupApproximation {
  Eigen::VectorXd beta;
  double sup_error = 0.0;
};

/**
 * Best shape-restricted spline approximation in the sup norm on a grid:
 *   min_beta max_x |Phi(x)' beta - target(x)|  s.t.  shape rows hold on the grid.
 * Solved as one LP with an extra slack variable. Throws InfeasibleError when
 * the shape rows contradict each other on the grid.
 */
SupApproximation constrained_sup_approx(std::span<const double> target, const BSplineBasis& basis,
                                        const ShapeSpec& shape, std::span<const double> fit_grid);

}  // namespace npiv
