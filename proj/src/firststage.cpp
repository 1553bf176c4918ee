#include "npiv/firststage.hpp"

#include "npiv/error.hpp"

#include <cmath>
#include <string>

namespace npiv {

void Sample::validate() const {
  if (y.size() != x.size() || y.size() != z.size()) {
    throw InputError("sample columns differ in length: y=" + std::to_string(y.size()) +
                     " x=" + std::to_string(x.size()) + " z=" + std::to_string(z.size()));
  }
  if (y.empty()) throw InputError("sample is empty");
  for (size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(x[i]) || !std::isfinite(z[i])) {
      throw InputError("non-finite value in sample row " + std::to_string(i));
    }
  }
}

namespace {

// Fixed-size observation blocks: partial sums are formed per block and added
// in block order, so the parallel kernel is bit-identical to the serial one.
constexpr long kBlockSize = 2048;

struct CrossProducts {
  Eigen::MatrixXd psi_psi;  // L x L
  Eigen::MatrixXd psi_rhs;  // L x (1 + K): column 0 for Y, then Phi(X)
};

void accumulate_range(const Sample& s, const BSplineBasis& zb, const BSplineBasis* xb, long begin,
                      long end, CrossProducts& acc) {
  const int zo = zb.order();
  std::vector<double> psi(zo);
  std::vector<double> phi(xb ? xb->order() : 0);
  for (long i = begin; i < end; ++i) {
    const int zf = zb.eval_local(s.z[i], 0, psi);
    for (int a = 0; a < zo; ++a) {
      for (int b = 0; b < zo; ++b) acc.psi_psi(zf + a, zf + b) += psi[a] * psi[b];
    }
    if (xb == nullptr) continue;
    const int xf = xb->eval_local(s.x[i], 0, phi);
    for (int a = 0; a < zo; ++a) {
      acc.psi_rhs(zf + a, 0) += psi[a] * s.y[i];
      for (int b = 0; b < xb->order(); ++b) acc.psi_rhs(zf + a, 1 + xf + b) += psi[a] * phi[b];
    }
  }
}

CrossProducts cross_products(const Sample& s, const BSplineBasis& zb, const BSplineBasis* xb,
                             Execution exec) {
  const int l = zb.dimension();
  const int rhs_cols = xb ? 1 + xb->dimension() : 0;
  const long n = static_cast<long>(s.z.size());
  const long blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<CrossProducts> partial(blocks, CrossProducts{Eigen::MatrixXd::Zero(l, l),
                                                           Eigen::MatrixXd::Zero(l, rhs_cols)});
  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (is_parallel(exec))
  for (long b = 0; b < blocks; ++b) {
    try {
      accumulate_range(s, zb, xb, b * kBlockSize, std::min(n, (b + 1) * kBlockSize), partial[b]);
    } catch (...) {
#pragma omp critical(npiv_cross_products_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  CrossProducts total{Eigen::MatrixXd::Zero(l, l), Eigen::MatrixXd::Zero(l, rhs_cols)};
  for (const auto& p : partial) {
    total.psi_psi += p.psi_psi;
    total.psi_rhs += p.psi_rhs;
  }
  total.psi_psi /= static_cast<double>(n);
  total.psi_rhs /= static_cast<double>(n);
  return total;
}

}  // namespace

Eigen::MatrixXd gram_matrix(const BSplineBasis& z_basis, std::span<const double> z, Execution exec) {
  if (z.empty()) throw InputError("gram matrix needs at least one observation");
  Sample s;
  s.z.assign(z.begin(), z.end());
  return cross_products(s, z_basis, nullptr, exec).psi_psi;
}

FirstStageFit fit_first_stage(const Sample& sample, const BSplineBasis& z_basis,
                              const BSplineBasis& x_basis, Execution exec) {
  sample.validate();
  const auto n = sample.size();
  const int l = z_basis.dimension();
  if (n < static_cast<size_t>(l)) {
    throw SingularDesignError("first stage needs n >= L: n=" + std::to_string(n) +
                              ", L=" + std::to_string(l));
  }
  const CrossProducts cp = cross_products(sample, z_basis, &x_basis, exec);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cp.psi_psi, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition <= kGramConditionFail)) {
    throw SingularDesignError("instrument Gram matrix is singular (condition number " +
                              std::to_string(condition) + ") with L=" + std::to_string(l) +
                              " basis functions and n=" + std::to_string(n) + " observations");
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cp.psi_psi);
  const Eigen::MatrixXd coef = ldlt.solve(cp.psi_rhs);
  FirstStageFit fit{coef.col(0),
                    coef.rightCols(x_basis.dimension()),
                    condition,
                    condition > kGramConditionWarn,
                    z_basis,
                    x_basis};
  if (!fit.g_coef.allFinite() || !fit.pi_coef.allFinite()) {
    throw SingularDesignError("first-stage coefficients are not finite (L=" + std::to_string(l) +
                              ", n=" + std::to_string(n) + ")");
  }
  return fit;
}

FirstStagePrediction predict(const FirstStageFit& fit, double z) {
  const Eigen::VectorXd psi = fit.z_basis.eval(z);
  return {psi.dot(fit.g_coef), fit.pi_coef.transpose() * psi};
}

}  // namespace npiv
