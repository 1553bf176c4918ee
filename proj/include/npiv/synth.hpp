#pragma once

#include "npiv/firststage.hpp"
#include "npiv/splines.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace npiv {

/// A catalogued smooth function with its second derivative and declared bounds.
struct CatalogFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> second_derivative;
  double declared_sup = 0.0;        // declared bound on |f|
  double declared_curvature = 0.0;  // declared bound on |f''|
};

/// Catalogue version; bump when any entry changes so stored expectations can be checked.
inline constexpr int kDgpCatalogVersion = 1;

/// Structural functions on [0, 1]: "engel_logistic", "smooth_sine", "constant", "linear".
CatalogFunction structural_function(const std::string& name);
/// Instrument-invalidity functions: "zero" and "sine" (amplitude * sin(frequency * z)).
CatalogFunction invalidity_function(const std::string& name, double amplitude, double frequency);
std::vector<std::string> structural_catalog();

struct ContinuousDGPParams {
  std::string h0 = "engel_logistic";
  std::string u0 = "zero";
  double u0_amplitude = 0.0;
  double u0_frequency = 6.283185307179586;
  double z_lo = 0.0;
  double z_hi = 1.0;
  double rho = 0.6;          // instrument strength in X = rho Z + (1 - rho) V
  double endogeneity = 0.5;  // correlation between eps and V
  double noise_sd = 0.05;
};

/**
 * Triangular design with Z, V iid uniform on [z_lo, z_hi]:
 *   X = rho Z + (1 - rho) V,
 *   Y = h0(X) + u0(Z) + eps,  eps = noise_sd (e V~ + sqrt(1 - e^2) xi),
 * where V~ is V standardized and xi ~ N(0, 1). X is endogenous through V and
 * E[eps | Z] = 0, so E[Y - h0(X) | Z] = u0(Z).
 */
class ContinuousDGP {
 public:
  /// Validates parameters and audits the declared bounds on a 1e4-point grid.
  explicit ContinuousDGP(ContinuousDGPParams params);

  const ContinuousDGPParams& params() const { return params_; }
  const CatalogFunction& h0() const { return h0_; }
  const CatalogFunction& u0() const { return u0_; }

  double x_lo() const { return params_.z_lo; }
  double x_hi() const { return params_.z_hi; }

  /// E[f(X) | Z = z] by adaptive Gauss-Kronrod quadrature (relative tolerance 1e-12).
  double conditional_mean(const std::function<double(double)>& f, double z) const;

 private:
  ContinuousDGPParams params_;
  CatalogFunction h0_;
  CatalogFunction u0_;
};

Sample generate(const ContinuousDGP& dgp, long n, std::uint64_t seed);

/// g0(z) = E[h0(X) | Z = z] + u0(z) on each grid point.
std::vector<double> population_reduced_form(const ContinuousDGP& dgp, std::span<const double> z_grid);

/// Population Pi(z) = E[Phi(X) | Z = z] for a structural basis; one row per grid point.
Eigen::MatrixXd population_pi(const ContinuousDGP& dgp, const BSplineBasis& x_basis,
                              std::span<const double> z_grid);

}  // namespace npiv
