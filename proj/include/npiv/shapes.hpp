#pragma once

#include "npiv/lpsolve.hpp"
#include "npiv/splines.hpp"

#include <span>
#include <vector>

namespace npiv {

/// One linear restriction  sign * h^{(deriv_order)}(x) <= bound  imposed at every grid point.
struct ShapeRow {
  int deriv_order = 0;
  int sign = 1;
  double bound = 0.0;
};

/**
 * The shape operator and its bound: a stack of ShapeRows defining the
 * parameter space. Rows with derivative order 1 give monotonicity restrictions,
 * order 2 curvature restrictions.
 */
class ShapeSpec {
 public:
  ShapeSpec() = default;
  explicit ShapeSpec(std::vector<ShapeRow> rows);

  std::span<const ShapeRow> rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }
  int max_deriv_order() const;

  /// True when level rows of both signs are present, so |h| is bounded.
  bool implies_uniform_bound() const;
  /// True when every bound is at least `floor` (the strict-interior condition).
  bool bounds_at_least(double floor) const;

 private:
  std::vector<ShapeRow> rows_;
};

/// Functions into [0, 1] with |h''| <= second_deriv_bound.
ShapeSpec default_engel_spec(double second_deriv_bound);

/// Default floor for the strict-interior check on the bounds.
inline constexpr double kDefaultBoundFloor = 1e-8;

/// Inequalities  sign * D^{order} Phi(x)' beta <= bound  for every row and grid point,
/// grid-major (all rows of the first point first).
Constraints materialize_rows(const ShapeSpec& spec, const BSplineBasis& basis,
                             std::span<const double> x_grid);

}  // namespace npiv
