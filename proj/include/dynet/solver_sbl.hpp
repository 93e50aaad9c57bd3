#ifndef DYNET_SOLVER_SBL_HPP
#define DYNET_SOLVER_SBL_HPP

#include <Eigen/Dense>
#include <vector>

#include "dynet/regression.hpp"
#include "dynet/solver_result.hpp"

namespace dynet {

struct SblConfig {
  double gamma_init = 1.0;
  double sigma2_init_scale = 0.1;   // times var(y^[l]) per experiment
  double sigma2_floor_scale = 1e-10;
  int max_iters = 2000;
  double tol = 1e-6;                // relative change of gamma
  double prune_threshold = 1e-4;    // relative to max_j gamma_j; <= 0 disables pruning

  void validate() const;
};

/// Working state over the active groups.
struct SblState {
  std::vector<int> active_groups;       // indices into the original M groups
  Eigen::VectorXd gamma;                // per active group
  Eigen::VectorXd sigma2;               // per experiment
  Eigen::VectorXd mu;                   // posterior mean over active columns
  Eigen::MatrixXd sigma_w;              // posterior covariance over active columns
  std::vector<double> evidence_trace;
};

/// Log marginal likelihood log p(y; gamma, Sigma) with
/// Sigma_y = Sigma + A Gamma A^T. `gamma` and `sigma2` are per large group
/// and per experiment; the Woodbury dual is used when columns << rows.
double sbl_evidence(const GroupedRegressionProblem& problem, const Eigen::VectorXd& gamma,
                    const Eigen::VectorXd& sigma2);

/// Posterior mean and covariance of the weights at fixed hyperparameters.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> sbl_posterior(const GroupedRegressionProblem& problem,
                                                          const Eigen::VectorXd& gamma,
                                                          const Eigen::VectorXd& sigma2);

/// One EM iteration (E-step posterior moments, closed-form M-step updates of
/// gamma and the per-experiment noise variances) followed by gamma pruning.
void sbl_em_step(const GroupedRegressionProblem& problem, SblState& state, const SblConfig& cfg);

SolverResult solve_sbl(const GroupedRegressionProblem& problem, const SblConfig& cfg);

}  // namespace dynet

#endif  // DYNET_SOLVER_SBL_HPP
