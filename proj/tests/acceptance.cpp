// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "npiv/approx.hpp"
#include "npiv/bounds.hpp"
#include "npiv/commands.hpp"
#include "npiv/oracle.hpp"
#include "npiv/synth.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

using namespace npiv;
using npiv::testing::median;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

int failures = 0;

void run(const char* id, const char* title, const std::function<Outcome()>& criterion) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = criterion();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out.pass) ++failures;
  std::printf("%s %s  %s  [%s] (%.1fs)\n", out.pass ? "PASS" : "FAIL", id, title, out.detail.c_str(), secs);
  std::fflush(stdout);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------

Outcome constraint_count() {
  ContinuousDGPParams p;
  const auto sample = generate(ContinuousDGP(p), 2000, 1);
  const BoundsConfig cfg;
  const auto ctx = prepare_estimation(sample, cfg);
  const auto program = assemble_program(ctx.fit, cfg.shape, cfg.b, ctx.grids);
  const bool pass = program.num_rows() == 600 && program.num_vars() == 10;
  return {pass, fmt("%.0f constraints, %.0f variables", program.num_rows(), program.num_vars())};
}

Outcome knot_rule() {
  const auto knots = build_basis(0.0, 7.0, 4, 10).interior_knots();
  bool pass = knots.size() == 6;
  for (size_t j = 0; pass && j < knots.size(); ++j) pass = knots[j] == static_cast<double>(j + 1);
  std::string list;
  for (double k : knots) list += (list.empty() ? "" : ",") + fmt("%.17g", k);
  return {pass, "interior knots {" + list + "}"};
}

Outcome partition_of_unity() {
  std::mt19937_64 rng(2025);
  const auto basis = build_basis(0.0, 1.0, 4, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) worst = std::max(worst, std::abs(basis.eval(u(rng)).sum() - 1.0));
  return {worst < 1e-10, fmt("max |sum - 1| = %.2e over 1000 points", worst)};
}

Outcome lp_oracle() {
  std::mt19937_64 rng(4242);
  int status_mismatch = 0, infeasible = 0;
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto lp = npiv::testing::random_bounded_lp(rng);
    const auto brute = npiv::testing::vertex_enumeration(lp.a, lp.r, lp.c);
    const auto res = solve(Constraints(lp.a, lp.r), lp.c, Sense::maximize);
    const LPStatus expected = brute.feasible ? LPStatus::optimal : LPStatus::infeasible;
    if (res.status != expected) {
      ++status_mismatch;
      continue;
    }
    if (brute.feasible) {
      worst = std::max(worst, std::abs(res.value - brute.value));
    } else {
      ++infeasible;
    }
  }
  const bool pass = status_mismatch == 0 && worst <= 1e-8;
  return {pass, fmt("500 LPs (%.0f infeasible), status mismatches %.0f, max value gap %.2e", infeasible,
                    status_mismatch, worst)};
}

/// Discrete design comparable with the estimator: Z on 6 evenly spaced points,
/// X on 100 evenly spaced points in [0, 1], smooth conditional law of X given Z.
struct DiscreteDesign {
  DiscreteModel model;
  Eigen::VectorXd h0;
  Eigen::VectorXd u0;
};

DiscreteDesign discrete_design(double b) {
  const int p = 6, m = 100;
  DiscreteDesign d;
  d.model.x_support = Eigen::VectorXd::LinSpaced(m, 0.0, 1.0);
  d.model.z_support = Eigen::VectorXd::LinSpaced(p, 0.0, 1.0);
  d.model.joint_pmf.resize(p, m);
  for (int j = 0; j < p; ++j) {
    const double centre = 0.2 + 0.6 * d.model.z_support[j];
    for (int i = 0; i < m; ++i) {
      const double dev = (d.model.x_support[i] - centre) / 0.15;
      d.model.joint_pmf(j, i) = std::exp(-0.5 * dev * dev) + 0.02;
    }
    d.model.joint_pmf.row(j) /= d.model.joint_pmf.row(j).sum() * p;
  }
  const auto h = structural_function("engel_logistic");
  d.h0.resize(m);
  for (int i = 0; i < m; ++i) d.h0[i] = h.value(d.model.x_support[i]);
  d.u0.resize(p);
  for (int j = 0; j < p; ++j) d.u0[j] = (b - 0.005) * std::sin(6.283 * d.model.z_support[j] + 0.3);
  d.model.g0 = d.model.x_given_z() * d.h0 + d.u0;
  return d;
}

Outcome envelope_oracle() {
  const double b = 0.02, c = 1.0;
  const auto design = discrete_design(b);
  const auto oracle = discrete_envelopes(design.model, b, 0.0, 1.0, c);
  if (!oracle.feasible) return {false, "population identified set is empty"};

  BoundsConfig cfg;
  cfg.b = b;
  cfg.shape = default_engel_spec(c);

  auto distance = [&](long n, std::uint64_t seed) {
    const auto sample = discrete_dgp_sampler(design.model, design.h0, design.u0, 0.05, n, seed, 0.1);
    const auto band = estimate_envelopes(sample, cfg);
    if (!band.feasible) return std::numeric_limits<double>::infinity();
    double e = 0.0;
    for (int i = 0; i < design.model.num_x(); ++i) {
      e = std::max(e, std::max(std::abs(band.lower[i] - oracle.lower[i]), std::abs(band.upper[i] - oracle.upper[i])));
    }
    return e;
  };

  std::vector<double> medians;
  for (long n : {2000L, 8000L, 32000L}) {
    std::vector<double> d;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) d.push_back(distance(n, seed));
    medians.push_back(median(d));
  }
  double worst_50k = 0.0;
  for (std::uint64_t seed = 101; seed <= 120; ++seed) worst_50k = std::max(worst_50k, distance(50000, seed));
  const bool pass = worst_50k < 0.02 && strictly_decreasing(medians);
  return {pass, fmt("n=50000 max sup distance %.4f over 20 seeds; medians %.4f > %.4f > %.4f", worst_50k, medians[0],
                    medians[1], medians[2])};
}

Outcome nesting() {
  ContinuousDGPParams p;
  p.u0 = "sine";
  p.u0_amplitude = 0.01;
  const auto sample = generate(ContinuousDGP(p), 5000, 6);
  const auto ctx = prepare_estimation(sample, BoundsConfig{});
  const std::vector<double> bs{0.005, 0.02, 0.05}, cs{1.0, 2.0, 5.0};
  std::vector<std::vector<EnvelopeBand>> bands(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) bands[i].push_back(estimate_envelopes(ctx, bs[i], default_engel_spec(cs[j])));

  int violations = 0, feasible = 0;
  double worst = 0.0;
  auto contains = [&](const EnvelopeBand& outer, const EnvelopeBand& inner) {
    if (!inner.feasible) return;
    if (!outer.feasible) {
      ++violations;
      return;
    }
    for (size_t x = 0; x < inner.lower.size(); ++x) {
      const double excess = std::max(outer.lower[x] - inner.lower[x], inner.upper[x] - outer.upper[x]);
      worst = std::max(worst, excess);
      if (excess > 1e-7) ++violations;
    }
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (bands[i][j].feasible) ++feasible;
      if (i + 1 < 3) contains(bands[i + 1][j], bands[i][j]);
      if (j + 1 < 3) contains(bands[i][j + 1], bands[i][j]);
    }
  }
  return {violations == 0,
          fmt("%.0f/9 cells feasible, %.0f violations, max excess %.2e", feasible, violations, worst)};
}

Outcome containment() {
  const double b = 0.02;
  ContinuousDGPParams p;
  p.u0 = "sine";
  p.u0_amplitude = b - 0.005;
  const ContinuousDGP dgp(p);
  BoundsConfig cfg;
  cfg.b = b;
  cfg.shape = default_engel_spec(1.0);
  int ok = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto band = estimate_envelopes(generate(dgp, 50000, seed), cfg);
    if (!band.feasible) continue;
    double excess = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < band.x_grid.size(); ++i) {
      const double h = dgp.h0().value(band.x_grid[i]);
      excess = std::max(excess, std::max(band.lower[i] - h, h - band.upper[i]));
    }
    worst = std::max(worst, excess);
    if (excess <= 0.01) ++ok;
  }
  return {ok >= 19, fmt("%.0f/20 seeds contain h0 within 0.01 (largest excess %.4f)", ok, worst)};
}

Outcome bias_formula() {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  bool homogeneous = true;
  for (int t = 0; t < 50; ++t) {
    DiscreteModel model;
    model.x_support = Eigen::Vector3d(0.0, 0.5, 1.0);
    model.z_support = Eigen::Vector3d(0.0, 0.5, 1.0);
    model.joint_pmf.resize(3, 3);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) model.joint_pmf(j, i) = u(rng);
    model.joint_pmf /= model.joint_pmf.sum();
    model.g0 = Eigen::Vector3d::Constant(0.5);
    const Eigen::Vector3d w(normal(rng), normal(rng), normal(rng));

    // sup over the mu_Z ellipsoid of radius b of E[w(X) (A^{-1} u)(X)]
    const double b = 0.1;
    const Eigen::Vector3d d = model.x_given_z().transpose().fullPivLu().solve(model.mu_x().cwiseProduct(w));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(model.mu_z().asDiagonal()));
    const double sup =
        b * (eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * (eig.eigenvectors().transpose() * d)).norm();

    const auto r = functional_bias(model, w, b);
    worst = std::max(worst, r.representable ? std::abs(r.bias - sup) : INFINITY);
    homogeneous = homogeneous && functional_bias(model, w, 2.0 * b).bias == 2.0 * r.bias;
  }
  return {worst <= 1e-8 && homogeneous,
          fmt("max gap to ellipsoid oracle %.2e over 50 models; homogeneity ", worst) +
              (homogeneous ? "exact" : "violated")};
}

Outcome approximation_scaling() {
  const auto h = structural_function("smooth_sine");
  const auto grid = linspace(0.0, 1.0, 501);
  std::vector<double> target;
  for (double x : grid) target.push_back(h.value(x));
  const auto shape = default_engel_spec(h.declared_curvature);
  std::vector<double> errors;
  for (int k : {6, 10, 18, 34}) {
    errors.push_back(constrained_sup_approx(target, build_basis(0.0, 1.0, 4, k), shape, grid).sup_error);
  }
  bool monotone = true;
  for (size_t i = 1; i < errors.size(); ++i) monotone = monotone && errors[i] <= errors[i - 1];
  return {monotone && errors.back() < 1e-2,
          fmt("errors %.2e, %.2e, %.2e, %.2e", errors[0], errors[1], errors[2], errors[3])};
}

Outcome first_stage_decay() {
  const ContinuousDGP dgp{ContinuousDGPParams{}};
  std::vector<double> g_medians;
  for (long n : {500L, 2000L, 8000L}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto ctx = prepare_estimation(generate(dgp, n, seed), BoundsConfig{});
      const auto g0 = population_reduced_form(dgp, ctx.grids.z);
      double e = 0.0;
      for (size_t i = 0; i < g0.size(); ++i) e = std::max(e, std::abs(predict(ctx.fit, ctx.grids.z[i]).g_hat - g0[i]));
      errs.push_back(e);
    }
    g_medians.push_back(median(errs));
  }
  std::vector<double> pi_medians;
  for (int k : {6, 10, 14}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      BoundsConfig cfg;
      cfg.k_dim = k;
      const auto ctx = prepare_estimation(generate(dgp, 2000, seed), cfg);
      const auto pi = population_pi(dgp, ctx.x_basis, ctx.grids.z);
      double e = 0.0;
      for (size_t i = 0; i < ctx.grids.z.size(); ++i) {
        e = std::max(e, (predict(ctx.fit, ctx.grids.z[i]).pi_hat - pi.row(static_cast<Eigen::Index>(i)).transpose())
                            .lpNorm<Eigen::Infinity>());
      }
      errs.push_back(e);
    }
    pi_medians.push_back(median(errs));
  }
  const double ratio = *std::max_element(pi_medians.begin(), pi_medians.end()) /
                       *std::min_element(pi_medians.begin(), pi_medians.end());
  return {strictly_decreasing(g_medians) && ratio < 2.0,
          fmt("median g error %.4f > %.4f > %.4f; ", g_medians[0], g_medians[1], g_medians[2]) +
              fmt("Pi error %.4f / %.4f / %.4f at K = 6/10/14, ratio %.2f", pi_medians[0], pi_medians[1],
                  pi_medians[2], ratio)};
}

Outcome determinism() {
  RunConfig rc;
  rc.command = Command::estimate;
  rc.dgp = ContinuousDGPParams{};
  rc.n = 3000;
  rc.seed = 11;
  const auto first = dump_document(run_command(rc).document);
  const auto second = dump_document(run_command(rc).document);
  rc.exec = Execution::serial;
  const auto serial = dump_document(run_command(rc).document);
  const bool pass = first == second && first == serial;
  return {pass, fmt("%.0f-byte documents; rerun ", static_cast<double>(first.size())) +
                    (first == second ? "identical" : "differs") + ", serial kernels " +
                    (first == serial ? "identical" : "differ")};
}

}  // namespace

int main() {
  run("AC1", "constraint count with default grids", constraint_count);
  run("AC2", "knot rule", knot_rule);
  run("AC3", "partition of unity", partition_of_unity);
  run("AC4", "LP solver vs vertex enumeration", lp_oracle);
  run("AC5", "envelopes vs population oracle", envelope_oracle);
  run("AC6", "nesting along the b and c sweeps", nesting);
  run("AC7", "truth containment", containment);
  run("AC8", "worst-case bias formula", bias_formula);
  run("AC9", "constrained approximation scaling", approximation_scaling);
  run("AC10", "first-stage sup-norm decay", first_stage_decay);
  run("AC11", "byte-identical reruns", determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
