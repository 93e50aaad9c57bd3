#ifndef DYNET_SOLVER_RESULT_HPP
#define DYNET_SOLVER_RESULT_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace dynet {

/// Common output of all group-sparsity solvers.
struct SolverResult {
  Eigen::VectorXd weights;
  Eigen::VectorXd group_norms;      // per large group
  std::vector<bool> active;         // per large group
  int iterations = 0;
  bool converged = true;

  // diagnostics; which fields are filled depends on the solver
  std::vector<double> objective_trace;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  std::vector<double> evidence_trace;
  std::vector<double> sigma2_per_experiment;
  std::vector<double> inclusion_probabilities;
  std::map<std::string, double> acceptance_rates;
  int chain_length = 0;

  nlohmann::json to_json() const;
};

}  // namespace dynet

#endif  // DYNET_SOLVER_RESULT_HPP
