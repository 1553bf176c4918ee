#include "npiv/bounds.hpp"

#include "npiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

namespace npiv {

void BoundsConfig::validate() const {
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("misspecification bound b must be finite and >= 0");
  if (x_grid_size < 2 || z_grid_size < 2) throw ConfigError("grid sizes must be at least 2");
  if (!(z_quantile_trim >= 0.0 && z_quantile_trim < 0.5)) {
    throw ConfigError("z quantile trim must lie in [0, 0.5)");
  }
  if (spline_order < 1) throw ConfigError("spline order must be >= 1");
  if (k_dim < spline_order || l_dim < spline_order) {
    throw ConfigError("basis dimensions must be at least the spline order");
  }
  if (shape.size() == 0) throw ConfigError("shape specification has no rows");
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw ConfigError("linspace needs at least 2 points");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  out.front() = lo;
  out.back() = hi;
  return out;
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InputError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

std::pair<double, double> min_max(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

Grids build_grids(const Sample& sample, const BoundsConfig& config) {
  if (sample.size() < 2) throw InputError("grids need at least 2 observations");
  const auto [x_lo, x_hi] = min_max(sample.x);
  if (!(x_lo < x_hi)) throw InputError("degenerate domain: all x values are identical");

  std::vector<double> z_sorted = sample.z;
  std::sort(z_sorted.begin(), z_sorted.end());
  const double z_lo = quantile_type7(z_sorted, config.z_quantile_trim);
  const double z_hi = quantile_type7(z_sorted, 1.0 - config.z_quantile_trim);
  if (!(z_lo < z_hi)) throw InputError("degenerate domain: trimmed z range is empty");

  Grids g;
  g.x = linspace(x_lo, x_hi, config.x_grid_size);
  g.z = linspace(z_lo, z_hi, config.z_grid_size);
  g.d1_grid_gap = 0.5 * (x_hi - x_lo) / (config.x_grid_size - 1);
  g.d2_grid_gap = 0.5 * (z_hi - z_lo) / (config.z_grid_size - 1);
  return g;
}

EstimationContext prepare_estimation(const Sample& sample, const BoundsConfig& config,
                                     Execution exec) {
  config.validate();
  sample.validate();
  Grids grids = build_grids(sample, config);
  const auto [x_lo, x_hi] = min_max(sample.x);
  const auto [z_lo, z_hi] = min_max(sample.z);
  BSplineBasis x_basis(x_lo, x_hi, config.spline_order, config.k_dim);
  BSplineBasis z_basis(z_lo, z_hi, config.spline_order, config.l_dim);
  FirstStageFit fit = fit_first_stage(sample, z_basis, x_basis, exec);
  return {std::move(x_basis), std::move(z_basis), std::move(fit), std::move(grids)};
}

Constraints moment_rows(const FirstStageFit& fit, std::span<const double> z_grid, double b) {
  const int k = fit.x_basis.dimension();
  const auto nz = static_cast<Eigen::Index>(z_grid.size());
  Constraints out(Eigen::MatrixXd::Zero(2 * nz, k), Eigen::VectorXd::Zero(2 * nz));
  for (Eigen::Index i = 0; i < nz; ++i) {
    const FirstStagePrediction p = predict(fit, z_grid[i]);
    out.lhs.row(2 * i) = p.pi_hat.transpose();
    out.rhs[2 * i] = p.g_hat + b;
    out.lhs.row(2 * i + 1) = -p.pi_hat.transpose();
    out.rhs[2 * i + 1] = b - p.g_hat;
  }
  return out;
}

Constraints assemble_program(const FirstStageFit& fit, const ShapeSpec& shape, double b,
                             const Grids& grids) {
  Constraints program = moment_rows(fit, grids.z, b);
  program.append(materialize_rows(shape, fit.x_basis, grids.x));
  return program;
}

EnvelopeBand solve_envelopes(const Constraints& program, const BSplineBasis& x_basis,
                             std::span<const double> x_grid, Execution exec) {
  EnvelopeBand band;
  band.x_grid.assign(x_grid.begin(), x_grid.end());
  band.diagnostics.n_constraints = program.num_rows();
  band.diagnostics.n_variables = program.num_vars();

  const FeasibilityResult feas = check_feasibility(program);
  band.diagnostics.min_relaxation = feas.min_relaxation;
  if (!feas.feasible) return band;

  const auto n = static_cast<long>(x_grid.size());
  std::vector<Eigen::VectorXd> phi(n);
  for (long i = 0; i < n; ++i) phi[i] = x_basis.eval(x_grid[i]);

  std::vector<LPResult> upper(n), lower(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (is_parallel(exec))
  for (long t = 0; t < 2 * n; ++t) {
    try {
      const long i = t / 2;
      if (t % 2 == 0) {
        upper[i] = solve(program, phi[i], Sense::maximize);
      } else {
        lower[i] = solve(program, phi[i], Sense::minimize);
      }
    } catch (...) {
#pragma omp critical(npiv_envelope_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (long i = 0; i < n; ++i) {
    // The phase-one check accepted the set within tolerance; an envelope LP
    // that still sees it as empty means the set is empty up to round-off.
    if (upper[i].status == LPStatus::infeasible || lower[i].status == LPStatus::infeasible) {
      return band;
    }
  }
  band.feasible = true;
  band.lower.resize(n);
  band.upper.resize(n);
  band.central.resize(n);
  for (long i = 0; i < n; ++i) {
    double lo = lower[i].value;
    double hi = upper[i].value;
    // Degenerate intervals can come back crossed by round-off.
    if (lo > hi) lo = hi = 0.5 * (lo + hi);
    band.lower[i] = lo;
    band.upper[i] = hi;
    band.central[i] = 0.5 * (lo + hi);
  }
  return band;
}

EnvelopeBand estimate_envelopes(const EstimationContext& ctx, double b, const ShapeSpec& shape,
                                Execution exec) {
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("misspecification bound b must be finite and >= 0");
  const Constraints program = assemble_program(ctx.fit, shape, b, ctx.grids);
  EnvelopeBand band = solve_envelopes(program, ctx.x_basis, ctx.grids.x, exec);
  band.diagnostics.d1_grid_gap = ctx.grids.d1_grid_gap;
  band.diagnostics.d2_grid_gap = ctx.grids.d2_grid_gap;
  band.diagnostics.gram_condition = ctx.fit.gram_condition;
  band.diagnostics.gram_ill_conditioned = ctx.fit.ill_conditioned;
  return band;
}

EnvelopeBand estimate_envelopes(const Sample& sample, const BoundsConfig& config, Execution exec) {
  const EstimationContext ctx = prepare_estimation(sample, config, exec);
  return estimate_envelopes(ctx, config.b, config.shape, exec);
}

std::vector<double> worst_case_bias_of(std::span<const double> point_estimate,
                                       const EnvelopeBand& band) {
  if (!band.feasible) throw InputError("worst-case bias needs a feasible envelope band");
  if (point_estimate.size() != band.lower.size()) {
    throw InputError("point estimate length does not match the envelope grid");
  }
  std::vector<double> out(point_estimate.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(std::abs(point_estimate[i] - band.lower[i]),
                      std::abs(point_estimate[i] - band.upper[i]));
  }
  return out;
}

ReducedFormSeries reduced_form_series(const EstimationContext& ctx) {
  ReducedFormSeries out{ctx.grids.z, {}};
  out.g_hat.reserve(out.z_grid.size());
  for (double z : out.z_grid) out.g_hat.push_back(predict(ctx.fit, z).g_hat);
  return out;
}

}  // namespace npiv
