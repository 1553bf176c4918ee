#pragma once

#include "npiv/execution.hpp"
#include "npiv/firststage.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace npiv {

/// Finite joint distribution of (Z, X) plus the population reduced form E[Y | Z].
struct DiscreteModel {
  Eigen::VectorXd x_support;  // m
  Eigen::VectorXd z_support;  // p
  Eigen::MatrixXd joint_pmf;  // p x m, entry (j, i) = P(Z = z_j, X = x_i)
  Eigen::VectorXd g0;         // p

  int num_x() const { return static_cast<int>(x_support.size()); }
  int num_z() const { return static_cast<int>(z_support.size()); }

  /// Throws InputError on negative mass, total mass != 1, empty z cells or size mismatch.
  void validate() const;

  Eigen::VectorXd mu_x() const;
  Eigen::VectorXd mu_z() const;
  /// p x m, row j = P(X = . | Z = z_j). This is the conditional-expectation operator.
  Eigen::MatrixXd x_given_z() const;
  /// m x p, row i = P(Z = . | X = x_i). This is its adjoint.
  Eigen::MatrixXd z_given_x() const;
};

struct DiscreteEnvelopes {
  bool feasible = false;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/**
 * Exact identified-set envelopes when h ranges over R^m:
 * min/max h_i over  |g0 - A h| <= b,  lo <= h <= hi  and, when requested,
 * |h_{i+1} - 2 h_i + h_{i-1}| <= bound * spacing^2 (evenly spaced x support only).
 */
DiscreteEnvelopes discrete_envelopes(const DiscreteModel& model, double b, double h_lo, double h_hi,
                                     std::optional<double> second_diff_bound,
                                     Execution exec = Execution::parallel);

struct FunctionalBias {
  bool representable = false;  // a representer alpha with E[alpha(Z) | X] = w exists
  double bias = 0.0;           // +inf when not representable
  Eigen::VectorXd alpha;       // minimum L2(mu_Z)-norm representer
};

/// Worst-case bias of E[w(X) h(X)] under ||u0||_{L2(mu_Z)} <= b: b times the
/// smallest L2(mu_Z) norm of alpha solving E[alpha(Z) | X] = w.
FunctionalBias functional_bias(const DiscreteModel& model, const Eigen::VectorXd& w, double b);

/**
 * Draws n iid observations from the model with Y = h0(X) + u0(Z) + eps, where
 * eps = noise_sd * N(0,1) + endogeneity * (X - E[X | Z]). Both parts of eps have
 * mean zero given Z, so E[Y - h0(X) | Z = z_j] = u0_j exactly.
 */
Sample discrete_dgp_sampler(const DiscreteModel& model, const Eigen::VectorXd& h0,
                            const Eigen::VectorXd& u0, double noise_sd, long n, std::uint64_t seed,
                            double endogeneity = 0.0);

}  // namespace npiv
