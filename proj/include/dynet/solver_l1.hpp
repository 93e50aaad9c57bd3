#ifndef DYNET_SOLVER_L1_HPP
#define DYNET_SOLVER_L1_HPP

#include <Eigen/Dense>
#include <vector>

#include "dynet/regression.hpp"
#include "dynet/solver_result.hpp"

namespace dynet {

struct L1Config {
  double lambda = 0.1;

  // iterative reweighting
  double eps0 = 0.1;
  double eps_factor = 10.0;
  double eps_floor = 1e-8;
  bool adaptive_eps = false;
  int outer_max_iters = 10;
  double outer_tol = 1e-4;

  // ADMM
  int admm_max_iters = 10000;
  double admm_tol = 1e-6;  // scaled by sqrt(dimension)
  double beta = 0.5;       // backtracking shrink factor
  double gamma0 = 1.0;

  double zero_threshold = 1e-5;  // relative to the largest group norm

  void validate() const;
};

/// Block soft-thresholding: (1 - tau/||v||)_+ v; the zero vector when
/// ||v|| <= tau.
Eigen::VectorXd prox_group(const Eigen::VectorXd& v, double tau);

/// Solves (I + gamma A^T A) x = gamma A^T y + v through a cached Cholesky
/// factorization held by the caller.
class QuadraticProx {
 public:
  QuadraticProx(const Eigen::MatrixXd& A, const Eigen::VectorXd& y);
  Eigen::VectorXd operator()(const Eigen::VectorXd& v, double gamma);
  const Eigen::MatrixXd& AtA() const { return AtA_; }
  const Eigen::VectorXd& Aty() const { return Aty_; }

 private:
  Eigen::MatrixXd AtA_;
  Eigen::VectorXd Aty_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double cached_gamma_ = -1.0;
};

/// Group-LASSO objective 1/2 ||y - A w||^2 + lambda sum_k nu_k sqrt(rhoS_k) ||w_k||.
double group_lasso_objective(const GroupedRegressionProblem& problem, const Eigen::VectorXd& w,
                             double lambda, const Eigen::VectorXd& nu);

/// The epsilon values visited by the reweighting schedule, eps0 down to the
/// floor by the decay factor.
std::vector<double> epsilon_schedule(const L1Config& cfg);

SolverResult solve_group_lasso(const GroupedRegressionProblem& problem, const L1Config& cfg);
SolverResult solve_irl1(const GroupedRegressionProblem& problem, const L1Config& cfg);

/// Sparsity density (fraction of active groups) per lambda; supports the
/// manual logarithmic-scale selection procedure.
std::vector<std::pair<double, double>> lambda_sweep(const GroupedRegressionProblem& problem,
                                                    const L1Config& cfg,
                                                    const std::vector<double>& lambdas);

}  // namespace dynet

#endif  // DYNET_SOLVER_L1_HPP
