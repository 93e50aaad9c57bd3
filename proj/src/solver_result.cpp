#include "dynet/solver_result.hpp"

namespace dynet {

nlohmann::json SolverResult::to_json() const {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["weights"] = std::vector<double>(weights.data(), weights.data() + weights.size());
  j["group_norms"] = std::vector<double>(group_norms.data(), group_norms.data() + group_norms.size());
  j["active"] = active;
  j["iterations"] = iterations;
  j["converged"] = converged;
  if (!objective_trace.empty()) j["objective_trace"] = objective_trace;
  if (!primal_residuals.empty()) j["primal_residuals"] = primal_residuals;
  if (!dual_residuals.empty()) j["dual_residuals"] = dual_residuals;
  if (!evidence_trace.empty()) j["evidence_trace"] = evidence_trace;
  if (!sigma2_per_experiment.empty()) j["sigma2_per_experiment"] = sigma2_per_experiment;
  if (!inclusion_probabilities.empty()) j["inclusion_probabilities"] = inclusion_probabilities;
  if (!acceptance_rates.empty()) j["acceptance_rates"] = acceptance_rates;
  if (chain_length > 0) j["chain_length"] = chain_length;
  return j;
}

}  // namespace dynet
