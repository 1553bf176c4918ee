#include "doctest.h"

#include "npiv/bounds.hpp"
#include "npiv/error.hpp"
#include "npiv/shapes.hpp"

#include <cmath>
#include <random>

using namespace npiv;

TEST_CASE("default Engel specification") {
  const auto spec = default_engel_spec(2.0);
  REQUIRE(spec.size() == 4);
  const double bounds[4] = {1.0, 0.0, 2.0, 2.0};
  const int orders[4] = {0, 0, 2, 2};
  const int signs[4] = {1, -1, 1, -1};
  for (int i = 0; i < 4; ++i) {
    CHECK(spec.rows()[i].bound == bounds[i]);
    CHECK(spec.rows()[i].deriv_order == orders[i]);
    CHECK(spec.rows()[i].sign == signs[i]);
  }
  CHECK(spec.implies_uniform_bound());
  CHECK(spec.max_deriv_order() == 2);
  // the lower range row has bound 0, below any positive floor
  CHECK_FALSE(spec.bounds_at_least(kDefaultBoundFloor));

  const auto benchmark = default_engel_spec(0.5);
  CHECK(benchmark.rows()[2].bound == 0.5);
  CHECK(benchmark.rows()[3].bound == 0.5);
  CHECK(benchmark.implies_uniform_bound());

  CHECK_THROWS_AS(default_engel_spec(0.0), ConfigError);
  CHECK_THROWS_AS(default_engel_spec(-1.0), ConfigError);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(ShapeSpec({{3, 1, 1.0}}), ConfigError);
  CHECK_THROWS_AS(ShapeSpec({{0, 2, 1.0}}), ConfigError);
  CHECK_THROWS_AS(ShapeSpec({{0, 1, INFINITY}}), ConfigError);
  CHECK_FALSE(ShapeSpec({{0, 1, 1.0}, {2, -1, 1.0}}).implies_uniform_bound());
  const ShapeSpec monotone({{0, 1, 1.0}, {0, -1, 0.0}, {1, 1, 0.0}});
  CHECK(monotone.implies_uniform_bound());
  CHECK(monotone.max_deriv_order() == 1);
  CHECK(ShapeSpec({{0, 1, 1.0}, {0, -1, 0.5}}).bounds_at_least(0.5));
}

TEST_CASE("materialized rows") {
  const auto basis = build_basis(0.0, 1.0, 4, 10);

  SUBCASE("row count and layout") {
    const auto grid = linspace(0.0, 1.0, 100);
    const auto spec = default_engel_spec(1.0);
    const auto rows = materialize_rows(spec, basis, grid);
    CHECK(rows.num_rows() == 400);
    CHECK(rows.num_vars() == 10);
    for (int g : {0, 37, 99}) {
      for (int r = 0; r < 4; ++r) {
        const auto& row = spec.rows()[r];
        const Eigen::VectorXd expected = row.sign * basis.eval_deriv(grid[g], row.deriv_order);
        CHECK((rows.lhs.row(4 * g + r).transpose() - expected).norm() == 0.0);
        CHECK(rows.rhs[4 * g + r] == row.bound);
      }
    }
  }
  SUBCASE("single row at a single point") {
    const std::vector<double> grid{0.3};
    const auto rows = materialize_rows(ShapeSpec({{0, 1, 1.0}}), basis, grid);
    REQUIRE(rows.num_rows() == 1);
    CHECK((rows.lhs.row(0).transpose() - basis.eval(0.3)).norm() == 0.0);
    CHECK(rows.rhs[0] == 1.0);
  }
  SUBCASE("zero satisfies the default rows") {
    const auto rows = materialize_rows(default_engel_spec(3.0), basis, linspace(0.0, 1.0, 57));
    CHECK(rows.max_scaled_violation(Eigen::VectorXd::Zero(10)) == 0.0);
  }
  SUBCASE("empty grid") {
    const std::vector<double> grid;
    CHECK_THROWS_AS(materialize_rows(default_engel_spec(1.0), basis, grid), InputError);
  }
  SUBCASE("grid outside the basis domain") {
    const std::vector<double> grid{1.5};
    CHECK_THROWS_AS(materialize_rows(default_engel_spec(1.0), basis, grid), DomainError);
  }
}

TEST_CASE("violations between grid points are bounded by the slope times the spacing") {
  const auto basis = build_basis(0.0, 1.0, 4, 10);
  const auto spec = default_engel_spec(5.0);
  const auto coarse = linspace(0.0, 1.0, 25);
  const double spacing = coarse[1] - coarse[0];
  const auto rows = materialize_rows(spec, basis, coarse);
  const auto audit = linspace(0.0, 1.0, 5001);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  int tried = 0;
  for (int t = 0; t < 2000 && tried < 100; ++t) {
    // smooth coefficient vectors near the upper range bound
    Eigen::VectorXd beta(10);
    const double level = 0.9 + 0.05 * normal(rng);
    for (int i = 0; i < 10; ++i) beta[i] = level + 0.03 * normal(rng);
    if (rows.max_scaled_violation(beta) > 0.0) continue;
    ++tried;
    double lipschitz = 0.0;
    double worst = 0.0;
    for (double x : audit) {
      lipschitz = std::max(lipschitz, std::abs(basis.eval_deriv(x, 1).dot(beta)));
      worst = std::max(worst, basis.eval(x).dot(beta) - 1.0);
    }
    CHECK(worst <= lipschitz * spacing + 1e-12);
  }
  CHECK(tried > 10);
}
