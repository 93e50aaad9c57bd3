#ifndef DYNET_NETGEN_HPP
#define DYNET_NETGEN_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "dynet/network.hpp"
#include "dynet/regression.hpp"

namespace dynet {

struct GenConfig {
  int p = 10;
  int m = 1;
  double density = 0.2;        // fraction of the p*p positions of Q that are arcs
  int poly_order = 2;
  double pole_radius = 0.9;    // cap on root magnitude of the random polynomials
  int max_feedback = 3;
  double snr_db = 10.0;        // +infinity for noiseless simulation
  int L = 2;                   // number of experiments / replica
  int N = 500;                 // samples per experiment
  double perturbation = 0.1;   // replica coefficient perturbation magnitude
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedBenchmarkCase {
  BooleanNetwork truth;
  std::vector<ArxNetworkModel> models;  // one per experiment, shared structure
  std::vector<ExperimentData> data;     // one per experiment
  std::uint64_t seed = 0;
  std::vector<double> realized_snr_db;  // per output, first experiment
};

/// Deterministic per-index substream derivation for parallel trial seeding.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t index);

/// Random monic stable polynomial in q^-1 with all roots inside the disk of
/// the given radius; complex roots appear in conjugate pairs.
Polynomial random_stable_monic(int order, double radius, std::mt19937_64& rng);

/// Sparse structure with zero diagonal, the full chain y_1 -> ... -> y_p on
/// the subdiagonal, floor(density * p^2) arcs in total, at most max_feedback
/// above-diagonal arcs whose node intervals are nested or disjoint, and the
/// rest strictly below the diagonal.
BooleanNetwork random_boolean_structure(int p, double density, int max_feedback,
                                        std::mt19937_64& rng);

/// Small-gain cap on a feedback arc gain: safety / (forward-path bound x
/// feedback-arc norm).
double feedback_gain_bound(double forward_norm, double feedback_norm, double safety = 0.9);

/// Fills the structure with random stable arc dynamics and tunes feedback
/// gains inner loop to outer loop by composed H-infinity norm bounds, then
/// verifies closed-loop stability by the determinant root check; retries up
/// to 20 times before failing.
ArxNetworkModel stabilize_network(const BooleanNetwork& structure, const GenConfig& cfg,
                                  std::mt19937_64& rng);

/// Simulates the ARX difference equations driven by `u` plus white Gaussian
/// noise whose per-output variance realizes the requested SNR against the
/// noiseless trajectory. snr_db = +infinity gives the exact noiseless output.
ExperimentData simulate_arx(const ArxNetworkModel& model, const Eigen::MatrixXd& u,
                            double snr_db, std::mt19937_64& rng,
                            std::vector<double>* realized_snr_db = nullptr);

/// L structure-preserving copies with every non-leading nonzero coefficient
/// multiplied by (1 + delta), delta uniform in [-perturbation, perturbation];
/// stability re-verified with resampling (max 20 tries per replicum).
std::vector<ArxNetworkModel> make_replica(const ArxNetworkModel& model, double perturbation,
                                          int L, std::mt19937_64& rng);

/// Full pipeline: structure -> stabilized model -> L replica -> L simulated
/// experiments with i.i.d. standard normal inputs.
GeneratedBenchmarkCase generate_case(const GenConfig& cfg);

/// Sparse Hurwitz A by strict diagonal dominance with a filled superdiagonal,
/// B = e_1, C = [I 0], D = 0.
StateSpaceModel random_ct_system(int n, int p, double density, std::mt19937_64& rng);

/// Euler-Maruyama integration with internal step h = 1 / (100 f_s) and output
/// sampling at f_s = fs_multiplier * (max |Im eig| + max |Re eig|) / (2 pi);
/// the input is a unit step scaled by step_amplitude.
ExperimentData simulate_ct(const StateSpaceModel& ss, double step_amplitude,
                           double process_noise_std, double fs_multiplier, double T,
                           std::mt19937_64& rng);

}  // namespace dynet

#endif  // DYNET_NETGEN_HPP
