#pragma once

#include "npiv/execution.hpp"
#include "npiv/splines.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace npiv {

/// Observed (Y, X, Z) triples.
struct Sample {
  std::vector<double> y;
  std::vector<double> x;
  std::vector<double> z;

  size_t size() const { return y.size(); }
  /// Throws InputError unless lengths match, n >= 1 and every entry is finite.
  void validate() const;
};

/// Series estimates of E[Y|Z=z] and E[Phi(X)|Z=z] on the instrument basis Psi.
struct FirstStageFit {
  Eigen::VectorXd g_coef;   // L
  Eigen::MatrixXd pi_coef;  // L x K, column k belongs to Phi_k
  double gram_condition = 0.0;
  bool ill_conditioned = false;  // condition number above the warning threshold
  BSplineBasis z_basis;
  BSplineBasis x_basis;
};

inline constexpr double kGramConditionWarn = 1e8;
inline constexpr double kGramConditionFail = 1e12;

/// (1/n) sum Psi(z_i) Psi(z_i)'.
Eigen::MatrixXd gram_matrix(const BSplineBasis& z_basis, std::span<const double> z,
                            Execution exec = Execution::parallel);

/**
 * Least-squares projection of Y and of every component of Phi(X) on Psi(Z).
 * The Gram matrix is factorized once (pivoted LDL') and shared by all K + 1
 * right-hand sides. Throws SingularDesignError when its condition number
 * exceeds kGramConditionFail.
 */
FirstStageFit fit_first_stage(const Sample& sample, const BSplineBasis& z_basis,
                              const BSplineBasis& x_basis, Execution exec = Execution::parallel);

struct FirstStagePrediction {
  double g_hat = 0.0;
  Eigen::VectorXd pi_hat;  // length K
};

FirstStagePrediction predict(const FirstStageFit& fit, double z);

}  // namespace npiv
