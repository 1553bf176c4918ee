#include "npiv/shapes.hpp"

#include "npiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace npiv {

ShapeSpec::ShapeSpec(std::vector<ShapeRow> rows) : rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    if (row.deriv_order < 0 || row.deriv_order > 2) {
      throw ConfigError("shape row derivative order must be 0, 1 or 2, got " +
                        std::to_string(row.deriv_order));
    }
    if (row.sign != 1 && row.sign != -1) {
      throw ConfigError("shape row sign must be +1 or -1, got " + std::to_string(row.sign));
    }
    if (!std::isfinite(row.bound)) throw ConfigError("shape row bound must be finite");
  }
}

int ShapeSpec::max_deriv_order() const {
  int out = 0;
  for (const auto& row : rows_) out = std::max(out, row.deriv_order);
  return out;
}

bool ShapeSpec::implies_uniform_bound() const {
  bool upper = false, lower = false;
  for (const auto& row : rows_) {
    if (row.deriv_order != 0) continue;
    (row.sign > 0 ? upper : lower) = true;
  }
  return upper && lower;
}

bool ShapeSpec::bounds_at_least(double floor) const {
  return std::all_of(rows_.begin(), rows_.end(),
                     [floor](const ShapeRow& row) { return row.bound >= floor; });
}

ShapeSpec default_engel_spec(double second_deriv_bound) {
  if (!(second_deriv_bound > 0.0) || !std::isfinite(second_deriv_bound)) {
    throw ConfigError("second-derivative bound must be positive and finite");
  }
  return ShapeSpec({
      {0, +1, 1.0},
      {0, -1, 0.0},
      {2, +1, second_deriv_bound},
      {2, -1, second_deriv_bound},
  });
}

Constraints materialize_rows(const ShapeSpec& spec, const BSplineBasis& basis,
                             std::span<const double> x_grid) {
  if (x_grid.empty()) throw InputError("shape constraints need a nonempty grid");
  if (spec.max_deriv_order() >= basis.order()) {
    throw ConfigError("shape rows need derivatives of order " +
                      std::to_string(spec.max_deriv_order()) + " but the basis has order " +
                      std::to_string(basis.order()));
  }
  const int d = spec.size();
  Constraints out(Eigen::MatrixXd::Zero(d * static_cast<Eigen::Index>(x_grid.size()),
                                        basis.dimension()),
                  Eigen::VectorXd::Zero(d * static_cast<Eigen::Index>(x_grid.size())));
  std::vector<double> local(basis.order());
  for (size_t g = 0; g < x_grid.size(); ++g) {
    for (int r = 0; r < d; ++r) {
      const ShapeRow& row = spec.rows()[r];
      const Eigen::Index idx = static_cast<Eigen::Index>(g) * d + r;
      const int first = basis.eval_local(x_grid[g], row.deriv_order, local);
      for (int j = 0; j < basis.order(); ++j) out.lhs(idx, first + j) = row.sign * local[j];
      out.rhs[idx] = row.bound;
    }
  }
  return out;
}

}  // namespace npiv
