#ifndef DYNET_BENCH_HPP
#define DYNET_BENCH_HPP

#include <string>
#include <vector>

#include "dynet/netgen.hpp"
#include "dynet/network.hpp"
#include "dynet/regression.hpp"
#include "dynet/solver_l1.hpp"
#include "dynet/solver_mcmc.hpp"
#include "dynet/solver_sbl.hpp"
#include "json.hpp"

namespace dynet {

/// Counts over the candidate arc universe: the p(p-1) off-diagonal y->y
/// positions, plus the p*m u->y positions when inputs are scored too.
struct StructureMetrics {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  bool degenerate_precision = false;  // no predicted arcs

  double precision() const {
    if (tp + fp > 0) return static_cast<double>(tp) / (tp + fp);
    return fn == 0 ? 1.0 : 0.0;
  }
  double tpr() const {
    if (tp + fn > 0) return static_cast<double>(tp) / (tp + fn);
    return 1.0;
  }
};

StructureMetrics structure_metrics(const BooleanNetwork& estimated, const BooleanNetwork& truth,
                                   bool include_inputs = false);

struct ReconstructionConfig {
  std::string method = "girl1";  // girl1 | gsbl | gsmc
  int order = 2;                 // lag order of every regression group
  bool infer_inputs = true;      // also report u->y arcs
  bool standardize = true;       // rescale every channel to unit variance first
  L1Config l1;
  SblConfig sbl;
  McmcConfig mcmc;
};

struct ReconstructionResult {
  BooleanNetwork network;
  std::vector<BooleanNetwork> per_experiment;  // one per dataset, identical by
                                               // the shared group decisions
  std::vector<SolverResult> per_output;
};

/// Per-output grouped regression over all experiments, one solver run per
/// output, arcs assembled from the active groups.
ReconstructionResult reconstruct_network(const std::vector<ExperimentData>& data,
                                         const ReconstructionConfig& cfg);

struct BenchmarkConfig {
  int trials = 20;
  GenConfig gen;
  std::vector<std::string> methods = {"girl1", "gsbl", "gsmc"};
  int gsmc_samples = 100;  // the sampling-based method sees only this prefix
  int order = 2;
  bool standardize = true;
  int jobs = 1;
  std::uint64_t seed = 0;
  L1Config l1;
  SblConfig sbl;
  McmcConfig mcmc;

  static BenchmarkConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  // per method, aligned with the config's method list
  std::vector<StructureMetrics> metrics;
  std::vector<double> seconds;
  bool structures_consistent = true;  // per-experiment networks all equal
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<TrialRow> trials;
  std::vector<double> mean_precision, sd_precision;  // per method
  std::vector<double> mean_tpr, sd_tpr;
  int failures = 0;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one row per (trial, method)
};

BenchmarkReport run_benchmark(const BenchmarkConfig& cfg);

}  // namespace dynet

#endif  // DYNET_BENCH_HPP
