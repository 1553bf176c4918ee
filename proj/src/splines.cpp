#include "npiv/splines.hpp"

#include "npiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace npiv {

BSplineBasis::BSplineBasis(double lo, double hi, int order, int dimension)
    : lo_(lo), hi_(hi), order_(order), dimension_(dimension) {
  if (order < 1) throw ConfigError("spline order must be >= 1, got " + std::to_string(order));
  if (dimension < order) {
    throw ConfigError("spline dimension " + std::to_string(dimension) +
                      " is smaller than the order " + std::to_string(order));
  }
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError("spline domain must be finite");
  if (!(lo < hi)) throw InputError("degenerate spline domain: lo must be strictly below hi");

  const int interior = dimension - order;
  const int intervals = interior + 1;
  knots_.reserve(dimension + order);
  knots_.insert(knots_.end(), order, lo);
  for (int j = 1; j <= interior; ++j) {
    knots_.push_back((j * hi + (intervals - j) * lo) / intervals);
  }
  knots_.insert(knots_.end(), order, hi);
}

std::vector<double> BSplineBasis::interior_knots() const {
  return {knots_.begin() + order_, knots_.end() - order_};
}

int BSplineBasis::find_span(double x) const {
  // Index mu with knots[mu] <= x < knots[mu + 1], restricted to the last
  // nonempty interval at the right endpoint.
  if (x >= hi_) return dimension_ - 1;
  const auto it = std::upper_bound(knots_.begin() + order_, knots_.begin() + dimension_, x);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int BSplineBasis::eval_local(double x, int deriv_order, std::span<double> out) const {
  if (deriv_order < 0 || deriv_order >= order_) {
    throw ConfigError("derivative order " + std::to_string(deriv_order) +
                      " must lie in [0, order - 1] for an order-" + std::to_string(order_) +
                      " basis");
  }
  if (!(x >= lo_ && x <= hi_)) {
    throw DomainError("evaluation point " + std::to_string(x) + " outside spline domain [" +
                      std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
  }
  const int p = degree();
  const int span = find_span(x);

  // ndu holds the triangular table of basis values of every degree up to p
  // (upper part) and knot differences (lower part).
  const int s = order_;
  std::vector<double> ndu(s * s, 0.0);
  std::vector<double> left(s, 0.0), right(s, 0.0);
  auto at = [s](int i, int j) { return i * s + j; };
  ndu[at(0, 0)] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - j];
    right[j] = knots_[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[at(j, r)] = right[r + 1] + left[j - r];
      const double temp = ndu[at(r, j - 1)] / ndu[at(j, r)];
      ndu[at(r, j)] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[at(j, j)] = saved;
  }

  if (deriv_order == 0) {
    for (int j = 0; j <= p; ++j) out[j] = ndu[at(j, p)];
    return span - p;
  }

  // Derivatives via the recurrence on coefficient differences.
  std::vector<double> a(2 * s, 0.0);
  auto arow = [s](int row, int j) { return row * s + j; };
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    std::fill(a.begin(), a.end(), 0.0);
    a[arow(0, 0)] = 1.0;
    double d = 0.0;
    for (int k = 1; k <= deriv_order; ++k) {
      d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[arow(s2, 0)] = a[arow(s1, 0)] / ndu[at(pk + 1, rk)];
        d = a[arow(s2, 0)] * ndu[at(rk, pk)];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[arow(s2, j)] = (a[arow(s1, j)] - a[arow(s1, j - 1)]) / ndu[at(pk + 1, rk + j)];
        d += a[arow(s2, j)] * ndu[at(rk + j, pk)];
      }
      if (r <= pk) {
        a[arow(s2, k)] = -a[arow(s1, k - 1)] / ndu[at(pk + 1, r)];
        d += a[arow(s2, k)] * ndu[at(r, pk)];
      }
      std::swap(s1, s2);
    }
    out[r] = d;
  }
  double factor = 1.0;
  for (int k = 0; k < deriv_order; ++k) factor *= (p - k);
  for (int j = 0; j <= p; ++j) out[j] *= factor;
  return span - p;
}

Eigen::VectorXd BSplineBasis::eval(double x) const { return eval_deriv(x, 0); }

Eigen::VectorXd BSplineBasis::eval_deriv(double x, int deriv_order) const {
  std::vector<double> local(order_);
  const int first = eval_local(x, deriv_order, local);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(dimension_);
  for (int j = 0; j < order_; ++j) values[first + j] = local[j];
  return values;
}

BSplineBasis build_basis(double lo, double hi, int order, int dimension) {
  return BSplineBasis(lo, hi, order, dimension);
}

}  // namespace npiv
