#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace npiv {

/**
 * Clamped B-spline basis on a closed interval with evenly spaced interior knots.
 *
 * A basis of order s and dimension K has K - s interior knots placed at
 *   l_j = (j * hi + (K - s + 1 - j) * lo) / (K - s + 1),   j = 1 .. K - s,
 * and s-fold repeated boundary knots. For cubic splines (s = 4) this is the
 * usual "k - 3 intervals" rule. Values are computed with the Cox-de Boor
 * recurrence; the truncated-power representation spans the same space but is
 * badly conditioned and never formed.
 *
 * Immutable after construction; all member functions are safe to call concurrently.
 */
class BSplineBasis {
 public:
  BSplineBasis(double lo, double hi, int order, int dimension);

  int order() const { return order_; }
  int degree() const { return order_ - 1; }
  int dimension() const { return dimension_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Full clamped knot vector, length dimension + order.
  std::span<const double> knots() const { return knots_; }
  std::vector<double> interior_knots() const;

  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  /// All `dimension` basis values at x. Throws DomainError outside [lo, hi].
  Eigen::VectorXd eval(double x) const;

  /// Derivative of order `deriv_order` of every basis function at x.
  /// At interior knots the right limit is returned (left limit at x == hi).
  Eigen::VectorXd eval_deriv(double x, int deriv_order) const;

  /**
   * Nonzero block of the basis (or its derivative) at x: writes `order` values
   * into `out` and returns the index of the first basis function they belong to.
   * Used by the hot loops that only need the local support.
   */
  int eval_local(double x, int deriv_order, std::span<double> out) const;

 private:
  int find_span(double x) const;

  double lo_;
  double hi_;
  int order_;
  int dimension_;
  std::vector<double> knots_;
};

/// build_basis: validates the configuration and places the knots.
BSplineBasis build_basis(double lo, double hi, int order, int dimension);

}  // namespace npiv
