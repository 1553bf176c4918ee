#include "npiv/synth.hpp"

#include "npiv/error.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace npiv {

namespace {

constexpr int kAuditPoints = 10000;
constexpr double kQuadratureTol = 1e-12;

double integrate(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadratureTol);
}

}  // namespace

CatalogFunction structural_function(const std::string& name) {
  if (name == "engel_logistic") {
    // Decreasing budget-share curve: 0.15 + 0.3 / (1 + exp(4 (x - 0.5))).
    auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(4.0 * (x - 0.5))); };
    return {name,
            [sigma](double x) { return 0.15 + 0.3 * sigma(x); },
            [sigma](double x) {
              const double s = sigma(x);
              return 0.3 * 16.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
            },
            0.45,
            0.5};
  }
  if (name == "smooth_sine") {
    return {name,
            [](double x) { return 0.25 + 0.2 * std::sin(3.0 * x); },
            [](double x) { return -1.8 * std::sin(3.0 * x); },
            0.45,
            2.0};
  }
  if (name == "constant") {
    return {name, [](double) { return 0.4; }, [](double) { return 0.0; }, 0.4, 0.0};
  }
  if (name == "linear") {
    return {name, [](double x) { return 0.6 - 0.3 * x; }, [](double) { return 0.0; }, 0.6, 0.0};
  }
  throw ConfigError("unknown structural function '" + name + "'");
}

std::vector<std::string> structural_catalog() {
  return {"engel_logistic", "smooth_sine", "constant", "linear"};
}

CatalogFunction invalidity_function(const std::string& name, double amplitude, double frequency) {
  if (name == "zero") {
    return {name, [](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0};
  }
  if (name == "sine") {
    if (!std::isfinite(amplitude) || !std::isfinite(frequency)) {
      throw ConfigError("u0 amplitude and frequency must be finite");
    }
    return {name,
            [amplitude, frequency](double z) { return amplitude * std::sin(frequency * z); },
            [amplitude, frequency](double z) {
              return -amplitude * frequency * frequency * std::sin(frequency * z);
            },
            std::abs(amplitude),
            std::abs(amplitude) * frequency * frequency};
  }
  throw ConfigError("unknown invalidity function '" + name + "'");
}

ContinuousDGP::ContinuousDGP(ContinuousDGPParams params)
    : params_(std::move(params)),
      h0_(structural_function(params_.h0)),
      u0_(invalidity_function(params_.u0, params_.u0_amplitude, params_.u0_frequency)) {
  const auto& p = params_;
  if (!(p.z_lo < p.z_hi) || !std::isfinite(p.z_lo) || !std::isfinite(p.z_hi)) {
    throw ConfigError("instrument support must be a finite nondegenerate interval");
  }
  if (!(p.rho > 0.0 && p.rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  if (!(p.endogeneity >= -1.0 && p.endogeneity <= 1.0)) {
    throw ConfigError("endogeneity must lie in [-1, 1]");
  }
  if (!(p.noise_sd >= 0.0) || !std::isfinite(p.noise_sd)) throw ConfigError("noise_sd must be >= 0");

  for (int i = 0; i < kAuditPoints; ++i) {
    const double t = p.z_lo + (p.z_hi - p.z_lo) * i / (kAuditPoints - 1);
    if (std::abs(h0_.value(t)) > h0_.declared_sup + 1e-12 ||
        std::abs(h0_.second_derivative(t)) > h0_.declared_curvature + 1e-12) {
      throw ConfigError("structural function '" + h0_.name + "' violates its declared bounds");
    }
    if (std::abs(u0_.value(t)) > u0_.declared_sup + 1e-12) {
      throw ConfigError("invalidity function '" + u0_.name + "' violates its declared bound");
    }
  }
}

double ContinuousDGP::conditional_mean(const std::function<double(double)>& f, double z) const {
  const auto& p = params_;
  if (p.rho == 1.0) return f(z);
  // X | Z = z is uniform on [rho z + (1 - rho) lo, rho z + (1 - rho) hi].
  const double a = p.rho * z + (1.0 - p.rho) * p.z_lo;
  const double b = p.rho * z + (1.0 - p.rho) * p.z_hi;
  return integrate(f, a, b) / (b - a);
}

Sample generate(const ContinuousDGP& dgp, long n, std::uint64_t seed) {
  if (n < 1) throw InputError("sample size must be >= 1");
  const auto& p = dgp.params();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(p.z_lo, p.z_hi);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double v_mean = 0.5 * (p.z_lo + p.z_hi);
  const double v_sd = (p.z_hi - p.z_lo) / std::sqrt(12.0);
  const double idio = std::sqrt(std::max(0.0, 1.0 - p.endogeneity * p.endogeneity));

  Sample s;
  s.y.resize(n);
  s.x.resize(n);
  s.z.resize(n);
  for (long i = 0; i < n; ++i) {
    const double z = unif(rng);
    const double v = unif(rng);
    const double xi = normal(rng);
    const double x = std::clamp(p.rho * z + (1.0 - p.rho) * v, p.z_lo, p.z_hi);
    const double eps = p.noise_sd * (p.endogeneity * (v - v_mean) / v_sd + idio * xi);
    s.z[i] = z;
    s.x[i] = x;
    s.y[i] = dgp.h0().value(x) + dgp.u0().value(z) + eps;
  }
  return s;
}

std::vector<double> population_reduced_form(const ContinuousDGP& dgp, std::span<const double> z_grid) {
  std::vector<double> out;
  out.reserve(z_grid.size());
  for (double z : z_grid) {
    if (z < dgp.params().z_lo || z > dgp.params().z_hi) {
      throw DomainError("z grid point outside the instrument support");
    }
    out.push_back(dgp.conditional_mean(dgp.h0().value, z) + dgp.u0().value(z));
  }
  return out;
}

Eigen::MatrixXd population_pi(const ContinuousDGP& dgp, const BSplineBasis& x_basis,
                              std::span<const double> z_grid) {
  // Phi is piecewise polynomial; Gauss-Legendre on each knot interval is exact
  // up to degree 19.
  using Rule = boost::math::quadrature::gauss<double, 10>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  const auto& p = dgp.params();
  const auto knots = x_basis.knots();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(z_grid.size()), x_basis.dimension());
  for (size_t g = 0; g < z_grid.size(); ++g) {
    const double z = z_grid[g];
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(x_basis.dimension());
    if (p.rho == 1.0) {
      row = x_basis.eval(std::clamp(z, x_basis.lo(), x_basis.hi())).transpose();
    } else {
      const double a = std::max(p.rho * z + (1.0 - p.rho) * p.z_lo, x_basis.lo());
      const double b = std::min(p.rho * z + (1.0 - p.rho) * p.z_hi, x_basis.hi());
      const double width = (p.rho * z + (1.0 - p.rho) * p.z_hi) - (p.rho * z + (1.0 - p.rho) * p.z_lo);
      std::vector<double> cuts{a};
      for (double t : knots) {
        if (t > a && t < b && t != cuts.back()) cuts.push_back(t);
      }
      cuts.push_back(b);
      for (size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double lo = cuts[piece];
        const double hi = cuts[piece + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (size_t q = 0; q < abscissa.size(); ++q) {
          const double off = half * abscissa[q];
          row += weights[q] * half * (x_basis.eval(mid - off) + x_basis.eval(mid + off)).transpose();
        }
      }
      // X mass outside the basis domain is evaluated at the nearest endpoint.
      const double below = std::max(0.0, x_basis.lo() - (p.rho * z + (1.0 - p.rho) * p.z_lo));
      const double above = std::max(0.0, (p.rho * z + (1.0 - p.rho) * p.z_hi) - x_basis.hi());
      if (below > 0.0) row += below * x_basis.eval(x_basis.lo()).transpose();
      if (above > 0.0) row += above * x_basis.eval(x_basis.hi()).transpose();
      row /= width;
    }
    out.row(static_cast<Eigen::Index>(g)) = row;
  }
  return out;
}

}  // namespace npiv
