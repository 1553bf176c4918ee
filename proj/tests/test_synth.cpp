#include "doctest.h"

#include "npiv/bounds.hpp"
#include "npiv/error.hpp"
#include "npiv/synth.hpp"

#include <cmath>
#include <random>

using namespace npiv;

TEST_CASE("catalogue") {
  for (const auto& name : structural_catalog()) {
    const auto f = structural_function(name);
    CHECK(f.name == name);
    double sup = 0.0, curv = 0.0, lo = 1.0, hi = 0.0;
    for (double x : linspace(0.0, 1.0, 2001)) {
      const double v = f.value(x);
      sup = std::max(sup, std::abs(v));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      curv = std::max(curv, std::abs(f.second_derivative(x)));
      // the stated second derivative matches finite differences
      if (x > 1e-3 && x < 1.0 - 1e-3) {
        const double h = 1e-4;
        const double fd = (f.value(x + h) - 2.0 * v + f.value(x - h)) / (h * h);
        CHECK(std::abs(fd - f.second_derivative(x)) < 1e-5);
      }
    }
    CHECK(sup <= f.declared_sup);
    CHECK(curv <= f.declared_curvature);
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
  }
  CHECK_THROWS_AS(structural_function("cubic"), ConfigError);
  CHECK_THROWS_AS(invalidity_function("cosine", 0.1, 1.0), ConfigError);
  const auto u = invalidity_function("sine", -0.02, 3.0);
  CHECK(u.declared_sup == 0.02);
  CHECK(u.value(0.5) == doctest::Approx(-0.02 * std::sin(1.5)));
  CHECK(kDgpCatalogVersion == 1);
}

TEST_CASE("parameter validation") {
  ContinuousDGPParams p;
  p.rho = 0.0;
  CHECK_THROWS_AS(ContinuousDGP{p}, ConfigError);
  p = ContinuousDGPParams{};
  p.rho = 1.2;
  CHECK_THROWS_AS(ContinuousDGP{p}, ConfigError);
  p = ContinuousDGPParams{};
  p.endogeneity = 1.5;
  CHECK_THROWS_AS(ContinuousDGP{p}, ConfigError);
  p = ContinuousDGPParams{};
  p.z_hi = p.z_lo;
  CHECK_THROWS_AS(ContinuousDGP{p}, ConfigError);
  p = ContinuousDGPParams{};
  p.noise_sd = -1.0;
  CHECK_THROWS_AS(ContinuousDGP{p}, ConfigError);
  CHECK_THROWS_AS(generate(ContinuousDGP{ContinuousDGPParams{}}, 0, 1), InputError);
}

TEST_CASE("generated samples") {
  SUBCASE("reproducible for a fixed seed") {
    const ContinuousDGP dgp{ContinuousDGPParams{}};
    const auto a = generate(dgp, 1000, 3);
    const auto b = generate(dgp, 1000, 3);
    CHECK(a.y == b.y);
    CHECK(a.x == b.x);
    CHECK(a.z == b.z);
    CHECK(a.y != generate(dgp, 1000, 4).y);
  }
  SUBCASE("noise-free valid design") {
    ContinuousDGPParams p;
    p.noise_sd = 0.0;
    const ContinuousDGP dgp{p};
    const auto s = generate(dgp, 2000, 5);
    for (size_t i = 0; i < s.size(); ++i) {
      CHECK(s.y[i] == dgp.h0().value(s.x[i]));
      CHECK(s.x[i] >= 0.0);
      CHECK(s.x[i] <= 1.0);
    }
  }
  SUBCASE("regressor is endogenous") {
    ContinuousDGPParams p;
    p.endogeneity = 0.8;
    const ContinuousDGP dgp{p};
    const auto s = generate(dgp, 100000, 6);
    double cov_xe = 0.0, cov_ze = 0.0, mx = 0.0, mz = 0.0;
    const double n = static_cast<double>(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
      mx += s.x[i] / n;
      mz += s.z[i] / n;
    }
    for (size_t i = 0; i < s.size(); ++i) {
      const double e = s.y[i] - dgp.h0().value(s.x[i]);
      cov_xe += (s.x[i] - mx) * e / n;
      cov_ze += (s.z[i] - mz) * e / n;
    }
    // Cov(X, eps) = 0.4 * 0.05 * 0.8 * sd(V) = 0.0046
    CHECK(cov_xe == doctest::Approx(0.4 * 0.05 * 0.8 * std::sqrt(1.0 / 12.0)).epsilon(0.05));
    CHECK(std::abs(cov_ze) < 3e-4);
  }
  SUBCASE("binned residual means track the invalidity function") {
    ContinuousDGPParams p;
    p.u0 = "sine";
    p.u0_amplitude = 0.01;
    p.u0_frequency = 1.0;
    const ContinuousDGP dgp{p};
    const auto s = generate(dgp, 1000000, 7);
    const int bins = 20;
    std::vector<double> sum(bins, 0.0), truth(bins, 0.0);
    std::vector<long> count(bins, 0);
    for (size_t i = 0; i < s.size(); ++i) {
      const int k = std::min(bins - 1, static_cast<int>(s.z[i] * bins));
      sum[k] += s.y[i] - dgp.h0().value(s.x[i]);
      truth[k] += dgp.u0().value(s.z[i]);
      ++count[k];
    }
    for (int k = 0; k < bins; ++k) {
      CHECK(std::abs(sum[k] / count[k] - 0.01 * std::sin((k + 0.5) / bins)) < 0.005);
      CHECK(std::abs(sum[k] / count[k] - truth[k] / count[k]) < 0.001);
    }
  }
}

TEST_CASE("population reduced form") {
  const auto grid = linspace(0.0, 1.0, 21);

  SUBCASE("perfect instrument") {
    ContinuousDGPParams p;
    p.rho = 1.0;
    p.u0 = "sine";
    p.u0_amplitude = 0.02;
    const ContinuousDGP dgp{p};
    const auto g = population_reduced_form(dgp, grid);
    for (size_t i = 0; i < grid.size(); ++i) {
      CHECK(g[i] == doctest::Approx(dgp.h0().value(grid[i]) + dgp.u0().value(grid[i])).epsilon(1e-14));
    }
  }
  SUBCASE("constant structural function") {
    ContinuousDGPParams p;
    p.h0 = "constant";
    const auto g = population_reduced_form(ContinuousDGP{p}, grid);
    for (double v : g) CHECK(v == doctest::Approx(0.4).epsilon(1e-14));
  }
  SUBCASE("linear structural function has a closed form") {
    ContinuousDGPParams p;
    p.h0 = "linear";
    const auto g = population_reduced_form(ContinuousDGP{p}, grid);
    // E[X | Z = z] = rho z + (1 - rho) / 2
    for (size_t i = 0; i < grid.size(); ++i) {
      const double ex = p.rho * grid[i] + (1.0 - p.rho) / 2.0;
      CHECK(std::abs(g[i] - (0.6 - 0.3 * ex)) < 1e-12);
    }
  }
  SUBCASE("Monte Carlo integration agrees within three standard errors") {
    const ContinuousDGP dgp{ContinuousDGPParams{}};
    const std::vector<double> z{0.13, 0.5, 0.91};
    const auto g = population_reduced_form(dgp, z);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(0.0, 1.0);
    const long draws = 10000000;
    for (size_t j = 0; j < z.size(); ++j) {
      double sum = 0.0, sum2 = 0.0;
      for (long t = 0; t < draws; ++t) {
        const double h = dgp.h0().value(0.6 * z[j] + 0.4 * v(rng));
        sum += h;
        sum2 += h * h;
      }
      const double mean = sum / draws;
      const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
      CHECK(std::abs(g[j] - mean) < 3.0 * se);
    }
  }
  SUBCASE("points outside the instrument support") {
    const std::vector<double> z{1.5};
    CHECK_THROWS_AS(population_reduced_form(ContinuousDGP{ContinuousDGPParams{}}, z), DomainError);
  }
}

TEST_CASE("population basis projection") {
  const ContinuousDGP dgp{ContinuousDGPParams{}};
  const auto basis = build_basis(0.0, 1.0, 4, 10);
  const auto grid = linspace(0.0, 1.0, 13);
  const auto pi = population_pi(dgp, basis, grid);
  REQUIRE(pi.rows() == 13);
  REQUIRE(pi.cols() == 10);
  for (int g = 0; g < 13; ++g) {
    CHECK(pi.row(g).sum() == doctest::Approx(1.0).epsilon(1e-13));
    for (int k = 0; k < 10; k += 3) {
      const double adaptive = dgp.conditional_mean([&](double x) { return basis.eval(x)[k]; }, grid[g]);
      CHECK(std::abs(pi(g, k) - adaptive) < 1e-9);
    }
  }
  // with X = Z the projection is the basis itself
  ContinuousDGPParams p;
  p.rho = 1.0;
  const auto exact = population_pi(ContinuousDGP{p}, basis, grid);
  for (int g = 0; g < 13; ++g) CHECK((exact.row(g).transpose() - basis.eval(grid[g])).norm() < 1e-15);
}
