#pragma once

#include "npiv/execution.hpp"
#include "npiv/firststage.hpp"
#include "npiv/lpsolve.hpp"
#include "npiv/shapes.hpp"
#include "npiv/splines.hpp"

#include <span>
#include <vector>

namespace npiv {

struct BoundsConfig {
  double b = 0.02;  // sup-norm bound on E[Y - h(X) | Z], outcome units
  ShapeSpec shape = default_engel_spec(1.0);
  int k_dim = 10;  // structural basis dimension
  int l_dim = 6;   // instrument basis dimension
  int spline_order = 4;
  int x_grid_size = 100;
  int z_grid_size = 100;
  double z_quantile_trim = 0.005;

  void validate() const;
};

struct Grids {
  std::vector<double> x;
  std::vector<double> z;
  double d1_grid_gap = 0.0;  // half the x spacing
  double d2_grid_gap = 0.0;  // half the z spacing
};

struct EnvelopeDiagnostics {
  double d1_grid_gap = 0.0;
  double d2_grid_gap = 0.0;
  double gram_condition = 0.0;
  bool gram_ill_conditioned = false;
  int n_constraints = 0;
  int n_variables = 0;
  double min_relaxation = 0.0;  // phase-one relaxation needed for feasibility
};

/// Pointwise envelopes of the estimated identified set on the x grid.
struct EnvelopeBand {
  std::vector<double> x_grid;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> central;
  bool feasible = false;
  EnvelopeDiagnostics diagnostics;
};

/// n evenly spaced points from lo to hi inclusive; the last point is exactly hi.
std::vector<double> linspace(double lo, double hi, int n);

/// Sample quantile by linear interpolation of order statistics (type 7).
double quantile_type7(std::span<const double> sorted, double p);

Grids build_grids(const Sample& sample, const BoundsConfig& config);

/// Quantities shared by every (b, shape) cell of a sweep.
struct EstimationContext {
  BSplineBasis x_basis;
  BSplineBasis z_basis;
  FirstStageFit fit;
  Grids grids;
};

EstimationContext prepare_estimation(const Sample& sample, const BoundsConfig& config,
                                     Execution exec = Execution::parallel);

/// Rows  Pi(z)'beta <= g(z) + b  and  -Pi(z)'beta <= b - g(z)  per z grid point.
Constraints moment_rows(const FirstStageFit& fit, std::span<const double> z_grid, double b);

/// Moment rows followed by shape rows: 2|Z_n| + d|X_n| inequalities in K variables.
Constraints assemble_program(const FirstStageFit& fit, const ShapeSpec& shape, double b,
                             const Grids& grids);

/**
 * Envelope kernel: one phase-one feasibility check of the shared constraint
 * set, then max and min of Phi(x)'beta at every grid point. The serial path is
 * the reference implementation; the parallel path distributes grid points over
 * OpenMP threads and yields identical results.
 */
EnvelopeBand solve_envelopes(const Constraints& program, const BSplineBasis& x_basis,
                             std::span<const double> x_grid, Execution exec = Execution::parallel);

EnvelopeBand estimate_envelopes(const EstimationContext& ctx, double b, const ShapeSpec& shape,
                                Execution exec = Execution::parallel);
EnvelopeBand estimate_envelopes(const Sample& sample, const BoundsConfig& config,
                                Execution exec = Execution::parallel);

/// max(|p - lower|, |p - upper|) pointwise.
std::vector<double> worst_case_bias_of(std::span<const double> point_estimate,
                                       const EnvelopeBand& band);

struct ReducedFormSeries {
  std::vector<double> z_grid;
  std::vector<double> g_hat;
};

ReducedFormSeries reduced_form_series(const EstimationContext& ctx);

}  // namespace npiv
