#include "npiv/oracle.hpp"

#include "npiv/error.hpp"
#include "npiv/lpsolve.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace npiv {

void DiscreteModel::validate() const {
  const auto m = x_support.size();
  const auto p = z_support.size();
  if (m < 1 || p < 1) throw InputError("discrete model needs nonempty supports");
  if (joint_pmf.rows() != p || joint_pmf.cols() != m) {
    throw InputError("joint pmf must be " + std::to_string(p) + " x " + std::to_string(m));
  }
  if (g0.size() != p) throw InputError("g0 must have one entry per z support point");
  if (!joint_pmf.allFinite() || !g0.allFinite() || !x_support.allFinite() ||
      !z_support.allFinite()) {
    throw InputError("discrete model contains non-finite values");
  }
  if ((joint_pmf.array() < 0.0).any()) throw InputError("joint pmf has negative entries");
  if (std::abs(joint_pmf.sum() - 1.0) > 1e-9) throw InputError("joint pmf does not sum to 1");
  if ((joint_pmf.rowwise().sum().array() <= 0.0).any()) {
    throw InputError("every z support point needs positive probability");
  }
}

Eigen::VectorXd DiscreteModel::mu_x() const { return joint_pmf.colwise().sum().transpose(); }
Eigen::VectorXd DiscreteModel::mu_z() const { return joint_pmf.rowwise().sum(); }

Eigen::MatrixXd DiscreteModel::x_given_z() const {
  return mu_z().cwiseInverse().asDiagonal() * joint_pmf;
}

Eigen::MatrixXd DiscreteModel::z_given_x() const {
  const Eigen::VectorXd mx = mu_x();
  Eigen::MatrixXd out = joint_pmf.transpose();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (mx[i] > 0.0) out.row(i) /= mx[i];
  }
  return out;
}

DiscreteEnvelopes discrete_envelopes(const DiscreteModel& model, double b, double h_lo, double h_hi,
                                     std::optional<double> second_diff_bound, Execution exec) {
  model.validate();
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("b must be finite and >= 0");
  if (!(h_lo <= h_hi)) throw ConfigError("h bounds must satisfy lo <= hi");
  const int m = model.num_x();
  const int p = model.num_z();
  const Eigen::MatrixXd a = model.x_given_z();

  Constraints cons(Eigen::MatrixXd::Zero(2 * p + 2 * m, m), Eigen::VectorXd::Zero(2 * p + 2 * m));
  cons.lhs.topRows(p) = a;
  cons.rhs.head(p) = model.g0.array() + b;
  cons.lhs.middleRows(p, p) = -a;
  cons.rhs.segment(p, p) = b - model.g0.array();
  cons.lhs.middleRows(2 * p, m) = Eigen::MatrixXd::Identity(m, m);
  cons.rhs.segment(2 * p, m).setConstant(h_hi);
  cons.lhs.bottomRows(m) = -Eigen::MatrixXd::Identity(m, m);
  cons.rhs.tail(m).setConstant(-h_lo);

  if (second_diff_bound && m >= 3) {
    const double c = *second_diff_bound;
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("second-difference bound must be >= 0");
    const double spacing = model.x_support[1] - model.x_support[0];
    for (int i = 1; i + 1 < m; ++i) {
      const double step = model.x_support[i + 1] - model.x_support[i];
      if (std::abs(step - spacing) > 1e-9 * (1.0 + std::abs(spacing))) {
        throw ConfigError("curvature bound requires an evenly spaced x support");
      }
    }
    const double limit = c * spacing * spacing;
    Constraints curv(Eigen::MatrixXd::Zero(2 * (m - 2), m), Eigen::VectorXd::Constant(2 * (m - 2), limit));
    for (int i = 1; i + 1 < m; ++i) {
      const int r = 2 * (i - 1);
      curv.lhs(r, i - 1) = 1.0;
      curv.lhs(r, i) = -2.0;
      curv.lhs(r, i + 1) = 1.0;
      curv.lhs.row(r + 1) = -curv.lhs.row(r);
    }
    cons.append(curv);
  }

  DiscreteEnvelopes out;
  if (!check_feasibility(cons).feasible) return out;

  std::vector<Eigen::VectorXd> objectives(m);
  for (int i = 0; i < m; ++i) objectives[i] = Eigen::VectorXd::Unit(m, i);
  const auto up = solve_many(cons, objectives, Sense::maximize, exec);
  const auto down = solve_many(cons, objectives, Sense::minimize, exec);
  out.lower.resize(m);
  out.upper.resize(m);
  for (int i = 0; i < m; ++i) {
    if (up[i].status != LPStatus::optimal || down[i].status != LPStatus::optimal) return {};
    out.upper[i] = up[i].value;
    out.lower[i] = std::min(down[i].value, up[i].value);
  }
  out.feasible = true;
  return out;
}

FunctionalBias functional_bias(const DiscreteModel& model, const Eigen::VectorXd& w, double b) {
  model.validate();
  if (w.size() != model.num_x()) throw InputError("w needs one entry per x support point");
  if (!w.allFinite()) throw InputError("w must be finite");
  if (!std::isfinite(b) || b < 0.0) throw ConfigError("b must be finite and >= 0");

  // Minimize sum_j mu_z,j alpha_j^2 subject to B alpha = w. With
  // alpha = D^{-1/2} gamma this is the least-norm solution of B D^{-1/2} gamma = w.
  const Eigen::MatrixXd adjoint = model.z_given_x();
  const Eigen::VectorXd root_mu = model.mu_z().cwiseSqrt();
  const Eigen::MatrixXd scaled = adjoint * root_mu.cwiseInverse().asDiagonal();
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scaled);
  const Eigen::VectorXd gamma = cod.solve(w);
  const double residual = (scaled * gamma - w).norm();

  FunctionalBias out;
  if (residual > 1e-9 * (1.0 + w.norm())) {
    out.bias = std::numeric_limits<double>::infinity();
    return out;
  }
  out.representable = true;
  out.alpha = gamma.cwiseQuotient(root_mu);
  out.bias = b * gamma.norm();
  return out;
}

Sample discrete_dgp_sampler(const DiscreteModel& model, const Eigen::VectorXd& h0,
                            const Eigen::VectorXd& u0, double noise_sd, long n, std::uint64_t seed,
                            double endogeneity) {
  model.validate();
  if (h0.size() != model.num_x()) throw InputError("h0 needs one entry per x support point");
  if (u0.size() != model.num_z()) throw InputError("u0 needs one entry per z support point");
  if (!(noise_sd >= 0.0)) throw InputError("noise_sd must be >= 0");
  if (n < 1) throw InputError("sample size must be >= 1");

  const int m = model.num_x();
  const Eigen::VectorXd cond_mean_x = model.x_given_z() * model.x_support;
  std::vector<double> weights(model.joint_pmf.size());
  for (int j = 0; j < model.num_z(); ++j) {
    for (int i = 0; i < m; ++i) weights[static_cast<size_t>(j) * m + i] = model.joint_pmf(j, i);
  }

  std::mt19937_64 rng(seed);
  std::discrete_distribution<long> cell(weights.begin(), weights.end());
  std::normal_distribution<double> noise(0.0, 1.0);
  Sample s;
  s.y.resize(n);
  s.x.resize(n);
  s.z.resize(n);
  for (long t = 0; t < n; ++t) {
    const long idx = cell(rng);
    const long j = idx / m;
    const long i = idx % m;
    const double eps = noise_sd * noise(rng) + endogeneity * (model.x_support[i] - cond_mean_x[j]);
    s.x[t] = model.x_support[i];
    s.z[t] = model.z_support[j];
    s.y[t] = h0[i] + u0[j] + eps;
  }
  return s;
}

}  // namespace npiv
