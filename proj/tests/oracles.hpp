#ifndef DYNET_TESTS_ORACLES_HPP
#define DYNET_TESTS_ORACLES_HPP

// Independent reference implementations used only by the tests. They follow
// different algorithms than the library (coordinate descent with per-block
// exact minimization, dense enumeration) so agreement is meaningful.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dynet/regression.hpp"

namespace dynet::test {

// Exact minimizer of 1/2 ||r - B x||^2 + tau ||x||_2 over x, through the
// secular equation on nu = ||x||: x(nu) = (B^T B + (tau/nu) I)^{-1} B^T r,
// solved by bisection with an eigendecomposition of B^T B.
inline Eigen::VectorXd block_solution(const Eigen::MatrixXd& B, const Eigen::VectorXd& r,
                                      double tau) {
  const Eigen::VectorXd g = B.transpose() * r;
  if (g.norm() <= tau) return Eigen::VectorXd::Zero(B.cols());
  if (tau == 0.0) return B.colPivHouseholderQr().solve(r);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B.transpose() * B);
  const Eigen::VectorXd d = es.eigenvalues();
  const Eigen::VectorXd b = es.eigenvectors().transpose() * g;
  auto norm_at = [&](double nu) {
    double s = 0.0;
    for (int i = 0; i < d.size(); ++i) {
      const double den = d(i) + tau / nu;
      s += (b(i) / den) * (b(i) / den);
    }
    return std::sqrt(s);
  };
  double lo = 1e-300, hi = g.norm() / tau;
  while (norm_at(hi) > hi) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_at(mid) > mid)
      lo = mid;
    else
      hi = mid;
  }
  const double nu = 0.5 * (lo + hi);
  Eigen::VectorXd x = es.eigenvectors() *
                      (b.array() / (d.array() + tau / nu)).matrix();
  return x;
}

// Cyclic block coordinate descent for the weighted group LASSO
// 1/2 ||y - A w||^2 + lambda sum_k nu_k sqrt(rhoS_k) ||w_k||. Each block is
// minimized exactly, so the objective decreases monotonically to the optimum
// of this convex problem.
inline Eigen::VectorXd group_lasso_reference(const GroupedRegressionProblem& problem,
                                             double lambda, const Eigen::VectorXd& nu,
                                             int sweeps = 2000, double tol = 1e-12) {
  const int M = problem.groups();
  const std::vector<int> rhoS = problem.rho_large();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(problem.cols());
  Eigen::VectorXd residual = problem.y;  // y - A w

  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < M; ++k) {
      const auto [cb, ce] = block_columns_large(k, problem.rho, problem.L);
      const int nc = ce - cb;
      const Eigen::MatrixXd Bk = problem.A.middleCols(cb, nc);
      const Eigen::VectorXd wk = w.segment(cb, nc);
      const Eigen::VectorXd r = residual + Bk * wk;
      const double tau = lambda * nu(k) * std::sqrt(static_cast<double>(rhoS[k]));
      const Eigen::VectorXd wk_new = block_solution(Bk, r, tau);
      change = std::max(change, (wk_new - wk).cwiseAbs().maxCoeff());
      residual = r - Bk * wk_new;
      w.segment(cb, nc) = wk_new;
    }
    if (change < tol) break;
  }
  return w;
}

}  // namespace dynet::test

#endif  // DYNET_TESTS_ORACLES_HPP
