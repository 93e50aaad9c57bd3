#include "dynet/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dynet {

void GenConfig::validate() const {
  if (p < 2) throw std::invalid_argument("GenConfig: need at least two nodes");
  if (density <= 0.0 || density >= 1.0) throw std::invalid_argument("GenConfig: density in (0,1)");
  if (pole_radius <= 0.0 || pole_radius >= 1.0)
    throw std::invalid_argument("GenConfig: pole radius in (0,1)");
  if (poly_order < 1 || max_feedback < 0 || L < 1 || N < 1)
    throw std::invalid_argument("GenConfig: invalid order/feedback/L/N");
  if (perturbation < 0.0 || perturbation >= 1.0)
    throw std::invalid_argument("GenConfig: perturbation in [0,1)");
  if (std::isnan(snr_db)) throw std::invalid_argument("GenConfig: SNR must be finite or +inf");
}

std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Polynomial random_stable_monic(int order, double radius, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Polynomial p = Polynomial::constant(1.0);
  int left = order;
  while (left >= 2) {
    if (unif(rng) < 0.5) {
      // conjugate pair r e^{+-i theta}: 1 - 2 r cos(theta) q^-1 + r^2 q^-2
      const double r = radius * std::sqrt(unif(rng));
      const double th = std::numbers::pi_v<double> * unif(rng);
      p = p * Polynomial({1.0, -2.0 * r * std::cos(th), r * r});
    } else {
      const double r1 = radius * (2.0 * unif(rng) - 1.0);
      const double r2 = radius * (2.0 * unif(rng) - 1.0);
      p = p * Polynomial({1.0, -r1}) * Polynomial({1.0, -r2});
    }
    left -= 2;
  }
  if (left == 1) {
    const double r = radius * (2.0 * unif(rng) - 1.0);
    p = p * Polynomial({1.0, -r});
  }
  return p;
}

BooleanNetwork random_boolean_structure(int p, double density, int max_feedback,
                                        std::mt19937_64& rng) {
  const int total = static_cast<int>(std::floor(density * p * p));
  if (total < p - 1)
    throw std::invalid_argument("random_boolean_structure: density leaves no room for the chain");
  const int lower_capacity = p * (p - 1) / 2 - (p - 1);
  if (total - (p - 1) > max_feedback + lower_capacity)
    throw std::invalid_argument("random_boolean_structure: density exceeds layout capacity");

  BooleanNetwork net;
  net.p = p;
  net.m = 0;
  for (int k = 1; k < p; ++k) net.yy.insert({k, k - 1});  // chain y_{k-1} -> y_k

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int want_fb = max_feedback > 0
                    ? std::uniform_int_distribution<int>(0, max_feedback)(rng)
                    : 0;
  want_fb = std::min(want_fb, total - (p - 1));
  want_fb = std::max(want_fb, total - (p - 1) - lower_capacity);

  // feedback arcs: entry (i, j) with i < j spans the node interval [i, j];
  // intervals must be strictly nested or share no node
  std::vector<std::pair<int, int>> loops;
  int tries = 0;
  while (static_cast<int>(loops.size()) < want_fb && tries < 500) {
    ++tries;
    const int i = std::uniform_int_distribution<int>(0, p - 2)(rng);
    const int j = std::uniform_int_distribution<int>(i + 1, p - 1)(rng);
    if (net.yy.count({i, j})) continue;
    bool ok = true;
    for (const auto& [a, b] : loops) {
      const bool disjoint = (j < a) || (b < i);
      const bool nests = (a < i && j < b) || (i < a && b < j);
      if (!(disjoint || nests)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    loops.push_back({i, j});
    net.yy.insert({i, j});
  }

  // fill the rest strictly below the diagonal (feedforward)
  std::vector<std::pair<int, int>> lower;
  for (int i = 2; i < p; ++i)
    for (int j = 0; j < i - 1; ++j) lower.push_back({i, j});
  std::shuffle(lower.begin(), lower.end(), rng);
  for (const auto& arc : lower) {
    if (net.arc_count() >= total) break;
    net.yy.insert(arc);
  }
  if (net.arc_count() != total)
    throw std::runtime_error("random_boolean_structure: could not place all arcs");
  return net;
}

double feedback_gain_bound(double forward_norm, double feedback_norm, double safety) {
  if (forward_norm <= 0.0 || feedback_norm <= 0.0)
    throw std::invalid_argument("feedback_gain_bound: norms must be positive");
  return safety / (forward_norm * feedback_norm);
}

namespace {

Polynomial random_arc_numerator(double radius, double gain, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = radius * (2.0 * unif(rng) - 1.0);
  // g q^-1 (1 - r q^-1): strictly proper with zero constant term
  return Polynomial({0.0, gain, -gain * r});
}

ArxNetworkModel draw_model(const BooleanNetwork& structure, const GenConfig& cfg,
                           std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_gain = [&]() {
    const double g = 0.5 + unif(rng);
    return unif(rng) < 0.5 ? -g : g;
  };

  const int p = structure.p;
  ArxNetworkModel model;
  model.p = p;
  model.m = cfg.m;
  model.A.resize(p);
  model.By.assign(p, std::vector<Polynomial>(p, Polynomial::zero()));
  model.Bu.assign(p, std::vector<Polynomial>(cfg.m, Polynomial::zero()));
  for (int i = 0; i < p; ++i) model.A[i] = random_stable_monic(cfg.poly_order, cfg.pole_radius, rng);
  for (const auto& [i, j] : structure.yy)
    model.By[i][j] = random_arc_numerator(cfg.pole_radius, random_gain(), rng);
  for (const auto& [i, k] : structure.uy)
    model.Bu[i][k] = random_arc_numerator(cfg.pole_radius, random_gain(), rng);

  // small-gain tuning of feedback arcs, innermost interval first
  std::vector<std::pair<int, int>> loops;
  for (const auto& [i, j] : structure.yy)
    if (i < j) loops.push_back({i, j});
  std::sort(loops.begin(), loops.end(),
            [](const auto& a, const auto& b) { return a.second - a.first < b.second - b.first; });

  auto arc_norm = [&](int i, int j) {
    return hinf_norm(RationalTransferFunction(model.By[i][j], model.A[i]));
  };

  std::vector<std::pair<int, int>> closed;
  for (const auto& [i, j] : loops) {
    // forward-path H-inf bound from node i up to node j over the
    // below-diagonal arcs: series composes by product, merges by sum
    std::vector<double> dp(p, 0.0);
    dp[i] = 1.0;
    for (int v = i + 1; v <= j; ++v)
      for (int u = i; u < v; ++u)
        if (structure.yy.count({v, u}) && v > u) dp[v] += dp[u] * arc_norm(v, u);
    double fwd = dp[j];
    // already-closed nested loops enter the path as (1 - loop gain)^{-1}
    // blocks; loop gain is kept <= 0.9, so each contributes a factor 10
    for (const auto& [a, b] : closed)
      if (i <= a && b <= j) fwd *= 1.0 / (1.0 - 0.9);
    if (fwd <= 0.0) fwd = 1.0;  // no forward path: the loop is never closed

    const double fb = arc_norm(i, j);
    // the H-inf bound ignores phase and is very conservative for long
    // forward paths; flooring it keeps the arc numerically meaningful and
    // the exact stability check below has the final word
    const double g = std::clamp(feedback_gain_bound(fwd, fb), 0.05, 1.0);
    model.By[i][j] = model.By[i][j] * g;
    closed.push_back({i, j});
  }

  // repeated tuning: halve every feedback numerator until the polynomial
  // determinant test certifies stability
  for (int round = 0; round < 40 && !loops.empty() && !arx_is_stable(model); ++round)
    for (const auto& [i, j] : loops) model.By[i][j] = model.By[i][j] * 0.5;
  return model;
}

}  // namespace

ArxNetworkModel stabilize_network(const BooleanNetwork& structure, const GenConfig& cfg,
                                  std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    ArxNetworkModel model = draw_model(structure, cfg, rng);
    if (arx_is_stable(model)) return model;
  }
  throw std::runtime_error("stabilize_network: 20 attempts failed (seed " +
                           std::to_string(cfg.seed) + ")");
}

namespace {

int model_max_lag(const ArxNetworkModel& model) {
  int lag = 0;
  for (const auto& a : model.A) lag = std::max(lag, a.degree());
  for (const auto& row : model.By)
    for (const auto& b : row) lag = std::max(lag, b.degree());
  for (const auto& row : model.Bu)
    for (const auto& b : row) lag = std::max(lag, b.degree());
  return lag;
}

// Iterates the difference equations A_i(q) y_i = sum_j By_ij y_j +
// sum_k Bu_ik u_k + e_i. All cross terms start at lag one, so the outputs
// can be filled in plain time order.
Eigen::MatrixXd iterate_arx(const ArxNetworkModel& model, const Eigen::MatrixXd& u,
                            const Eigen::MatrixXd& e) {
  const int N = static_cast<int>(std::max(u.rows(), e.rows()));
  const int p = model.p;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(N, p);
  for (int t = 0; t < N; ++t) {
    for (int i = 0; i < p; ++i) {
      double v = e.rows() > 0 ? e(t, i) : 0.0;
      for (int a = 1; a <= model.A[i].degree(); ++a)
        if (t - a >= 0) v -= model.A[i].coeff(a) * y(t - a, i);
      for (int j = 0; j < p; ++j)
        for (int b = 1; b <= model.By[i][j].degree(); ++b)
          if (t - b >= 0) v += model.By[i][j].coeff(b) * y(t - b, j);
      for (int k = 0; k < model.m; ++k)
        for (int b = 1; b <= model.Bu[i][k].degree(); ++b)
          if (t - b >= 0 && u.rows() > 0) v += model.Bu[i][k].coeff(b) * u(t - b, k);
      y(t, i) = v;
    }
  }
  if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e12)
    throw std::runtime_error("simulate_arx: trajectory blew up (unstable model escape)");
  return y;
}

double column_var(const Eigen::VectorXd& x) {
  const double mu = x.mean();
  return (x.array() - mu).square().sum() / x.size();
}

}  // namespace

ExperimentData simulate_arx(const ArxNetworkModel& model, const Eigen::MatrixXd& u,
                            double snr_db, std::mt19937_64& rng,
                            std::vector<double>* realized_snr_db) {
  model.validate();
  if (u.cols() != model.m) throw std::invalid_argument("simulate_arx: input column mismatch");
  const int N = static_cast<int>(u.rows());
  const int p = model.p;
  const Eigen::MatrixXd no_e = Eigen::MatrixXd::Zero(N, p);

  ExperimentData out;
  out.u = u;
  const Eigen::MatrixXd clean = iterate_arx(model, u, no_e);
  if (std::isinf(snr_db)) {
    out.y = clean;
    if (realized_snr_db) realized_snr_db->assign(p, std::numeric_limits<double>::infinity());
    return out;
  }

  // unit-innovation noise-only responses, one per driving channel; the final
  // output is the exact linear superposition clean + sum_i sigma_i * resp_i
  const Eigen::MatrixXd no_u = Eigen::MatrixXd::Zero(N, model.m);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> resp(p);
  for (int i = 0; i < p; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(N, p);
    for (int t = 0; t < N; ++t) e(t, i) = normal(rng);
    resp[i] = iterate_arx(model, no_u, e);
  }

  // Per-output convention: the innovation of channel i is scaled so that its
  // own closed-loop noise component at output i carries exactly
  // var(clean_i) / ratio. This is always attainable; the noise other channels
  // leak into output i rides on top of it. (Trying to pin the total noise at
  // every output instead has no nonnegative-variance solution for many
  // coupled networks.)
  const double ratio = std::pow(10.0, snr_db / 10.0);
  Eigen::VectorXd sigma = Eigen::VectorXd::Zero(p);
  for (int i = 0; i < p; ++i) {
    const double target = column_var(clean.col(i)) / ratio;
    const double own = column_var(resp[i].col(i));
    if (target > 0.0 && own > 0.0) sigma(i) = std::sqrt(target / own);
  }

  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(N, p);
  for (int k = 0; k < p; ++k) noise += sigma(k) * resp[k];
  out.y = clean + noise;
  if (realized_snr_db) {
    realized_snr_db->resize(p);
    for (int i = 0; i < p; ++i) {
      const double nv = sigma(i) * sigma(i) * column_var(resp[i].col(i));
      (*realized_snr_db)[i] =
          nv > 0.0 ? 10.0 * std::log10(column_var(clean.col(i)) / nv)
                   : std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

namespace {

Polynomial perturb_poly(const Polynomial& poly, double magnitude, bool keep_leading_one,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> delta(-magnitude, magnitude);
  std::vector<double> c = poly.coeffs();
  for (size_t k = 0; k < c.size(); ++k) {
    if (keep_leading_one && k == 0) continue;  // preserve monicity
    if (c[k] != 0.0) c[k] *= 1.0 + delta(rng);
  }
  return Polynomial(std::move(c), poly.domain());
}

}  // namespace

std::vector<ArxNetworkModel> make_replica(const ArxNetworkModel& model, double perturbation,
                                          int L, std::mt19937_64& rng) {
  if (perturbation < 0.0 || perturbation >= 1.0)
    throw std::invalid_argument("make_replica: perturbation in [0,1)");
  std::vector<ArxNetworkModel> out;
  for (int l = 0; l < L; ++l) {
    bool done = false;
    for (int attempt = 0; attempt < 20 && !done; ++attempt) {
      ArxNetworkModel rep = model;
      for (auto& a : rep.A) a = perturb_poly(a, perturbation, true, rng);
      for (auto& row : rep.By)
        for (auto& b : row) b = perturb_poly(b, perturbation, false, rng);
      for (auto& row : rep.Bu)
        for (auto& b : row) b = perturb_poly(b, perturbation, false, rng);
      for (auto& c : rep.C) c = perturb_poly(c, perturbation, true, rng);
      if (perturbation == 0.0 || arx_is_stable(rep)) {
        out.push_back(std::move(rep));
        done = true;
      }
    }
    if (!done) throw std::runtime_error("make_replica: no stable perturbation found in 20 tries");
  }
  return out;
}

GeneratedBenchmarkCase generate_case(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);

  GeneratedBenchmarkCase out;
  out.seed = cfg.seed;

  // Redraw until every arc carries a coefficient that is numerically visible
  // next to the unit-scale arcs; deeply nested feedback can otherwise force a
  // gain so small the "true" arc is unrecoverable from data of any length.
  BooleanNetwork structure;
  ArxNetworkModel base;
  for (int attempt = 0; attempt < 50; ++attempt) {
    structure = random_boolean_structure(cfg.p, cfg.density, cfg.max_feedback, rng);
    structure.m = cfg.m;
    // spread the inputs over the nodes so each one excites its own node; with
    // m = p every node has an independent excitation source
    for (int k = 0; k < cfg.m; ++k) structure.uy.insert({k % cfg.p, k});
    base = stabilize_network(structure, cfg, rng);
    double min_gain = std::numeric_limits<double>::infinity();
    for (const auto& [i, j] : structure.yy) {
      double peak = 0.0;
      for (double c : base.By[i][j].coeffs()) peak = std::max(peak, std::abs(c));
      min_gain = std::min(min_gain, peak);
    }
    if (min_gain >= 0.02) break;
  }
  out.truth = structure;
  out.models = make_replica(base, cfg.perturbation, cfg.L, rng);

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < cfg.L; ++l) {
    Eigen::MatrixXd u(cfg.N, cfg.m);
    for (int t = 0; t < cfg.N; ++t)
      for (int k = 0; k < cfg.m; ++k) u(t, k) = normal(rng);
    std::vector<double> snr;
    out.data.push_back(simulate_arx(out.models[l], u, cfg.snr_db, rng, &snr));
    if (l == 0) out.realized_snr_db = snr;
  }
  return out;
}

StateSpaceModel random_ct_system(int n, int p, double density, std::mt19937_64& rng) {
  if (n < p || p < 1) throw std::invalid_argument("random_ct_system: need n >= p >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  StateSpaceModel ss;
  ss.domain = Domain::Continuous;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) ss.A(i, i) = -(0.5 + 1.5 * unif(rng));
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 0.1 + 0.9 * unif(rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && j != i + 1 && unif(rng) < density)
        ss.A(i, j) = (2.0 * unif(rng) - 1.0);
  // rescale off-diagonal rows into strict diagonal dominance (Gershgorin)
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += std::abs(ss.A(i, j));
    const double cap = 0.9 * std::abs(ss.A(i, i));
    if (off > cap)
      for (int j = 0; j < n; ++j)
        if (j != i) ss.A(i, j) *= cap / off;
  }
  ss.B = Eigen::MatrixXd::Zero(n, 1);
  ss.B(0, 0) = 1.0;
  ss.C = Eigen::MatrixXd::Zero(p, n);
  ss.C.leftCols(p).setIdentity();
  ss.D = Eigen::MatrixXd::Zero(p, 1);
  return ss;
}

ExperimentData simulate_ct(const StateSpaceModel& ss, double step_amplitude,
                           double process_noise_std, double fs_multiplier, double T,
                           std::mt19937_64& rng) {
  if (ss.domain != Domain::Continuous)
    throw std::invalid_argument("simulate_ct: continuous-time model required");
  if (T <= 0.0 || fs_multiplier <= 0.0) throw std::invalid_argument("simulate_ct: T, fs > 0");
  const Eigen::VectorXcd eig = ss.A.eigenvalues();
  const double wmax = eig.imag().cwiseAbs().maxCoeff() + eig.real().cwiseAbs().maxCoeff();
  const double fs = std::max(fs_multiplier * wmax / (2.0 * std::numbers::pi_v<double>), 1e-3);
  const double h = 1.0 / (100.0 * fs);
  const int per_sample = 100;
  const int samples = static_cast<int>(std::floor(T * fs)) + 1;

  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = ss.n();
  Eigen::VectorXd x = ss.m0.value_or(Eigen::VectorXd::Zero(n));
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(ss.m(), step_amplitude);

  ExperimentData out;
  out.sample_period = 1.0 / fs;
  out.y.resize(samples, ss.p());
  out.u.resize(samples, ss.m());
  const double sqh = std::sqrt(h) * process_noise_std;
  for (int s = 0; s < samples; ++s) {
    out.y.row(s) = (ss.C * x + ss.D * u).transpose();
    out.u.row(s) = u.transpose();
    for (int k = 0; k < per_sample; ++k) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = normal(rng);
      x += h * (ss.A * x + ss.B * u) + sqh * w;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12)
      throw std::runtime_error("simulate_ct: state diverged");
  }
  return out;
}

}  // namespace dynet
