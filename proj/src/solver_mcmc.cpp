#include "dynet/solver_mcmc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dynet {

void McmcConfig::validate() const {
  if (chain_length <= burn_in || burn_in < 0)
    throw std::invalid_argument("McmcConfig: require chain_length > burn_in >= 0");
  if (thinning < 1) throw std::invalid_argument("McmcConfig: thinning must be >= 1");
  if (bernoulli_prior <= 0.0 || bernoulli_prior >= 1.0)
    throw std::invalid_argument("McmcConfig: prior inclusion probability must be in (0,1)");
  if (a <= 0.0 || b <= 0.0 || c <= 0.0 || d <= 0.0 || rw_scale <= 0.0 || gamma_init <= 0.0)
    throw std::invalid_argument("McmcConfig: all hyperparameters must be positive");
}

namespace {

double log_inv_gamma(double x, double shape, double rate) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double group_gamma(const Eigen::VectorXd& gamma, int k, bool scalar) {
  return scalar ? gamma(0) : gamma(k);
}

}  // namespace

CollapsedPosterior::CollapsedPosterior(const GroupedRegressionProblem& problem)
    : problem_(problem) {
  for (const auto& [b, e] : problem.row_ranges) {
    const int nl = e - b;
    const Eigen::MatrixXd Al = problem.A.middleRows(b, nl);
    const Eigen::VectorXd yl = problem.y.segment(b, nl);
    AtA_.push_back(Al.transpose() * Al);
    Aty_.push_back(Al.transpose() * yl);
    yty_.push_back(yl.squaredNorm());
    rows_.push_back(nl);
  }
}

double CollapsedPosterior::operator()(const Eigen::VectorXi& s, const Eigen::VectorXd& gamma,
                                      const Eigen::VectorXd& sigma2,
                                      const McmcConfig& cfg) const {
  const int M = problem_.groups();
  const int L = problem_.L;
  if (sigma2.minCoeff() <= 0.0 || gamma.minCoeff() <= 0.0)
    return -std::numeric_limits<double>::infinity();

  double lp = 0.0;
  for (int k = 0; k < M; ++k)
    lp += s(k) ? std::log(cfg.bernoulli_prior) : std::log1p(-cfg.bernoulli_prior);
  for (int j = 0; j < gamma.size(); ++j) lp += log_inv_gamma(gamma(j), cfg.c, cfg.d);
  for (int l = 0; l < L; ++l) lp += log_inv_gamma(sigma2(l), cfg.a, cfg.b);

  // active columns and their prior variances
  std::vector<int> cols;
  std::vector<double> colg;
  for (int k = 0; k < M; ++k) {
    if (!s(k)) continue;
    const auto [cb, ce] = block_columns_large(k, problem_.rho, problem_.L);
    const double g = group_gamma(gamma, k, cfg.scalar_gamma);
    for (int c = cb; c < ce; ++c) {
      cols.push_back(c);
      colg.push_back(g);
    }
  }
  const int nc = static_cast<int>(cols.size());

  // logdet Sigma_y and y^T Sigma_y^{-1} y through the column-space identity
  double logdet = 0.0, quad = 0.0;
  for (int l = 0; l < L; ++l) {
    logdet += rows_[l] * std::log(sigma2(l));
    quad += yty_[l] / sigma2(l);
  }
  if (nc > 0) {
    Eigen::MatrixXd inner(nc, nc);
    Eigen::VectorXd v(nc);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nc, nc);
    Eigen::VectorXd gvec = Eigen::VectorXd::Zero(nc);
    for (int l = 0; l < L; ++l) {
      const double inv = 1.0 / sigma2(l);
      for (int i = 0; i < nc; ++i) {
        gvec(i) += inv * Aty_[l](cols[i]);
        for (int j = 0; j < nc; ++j) G(i, j) += inv * AtA_[l](cols[i], cols[j]);
      }
    }
    for (int i = 0; i < nc; ++i) {
      const double si = std::sqrt(colg[i]);
      v(i) = si * gvec(i);
      for (int j = 0; j < nc; ++j) inner(i, j) = si * std::sqrt(colg[j]) * G(i, j);
    }
    inner.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(inner);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("log_collapsed_posterior: inner matrix factorization failed");
    for (int i = 0; i < nc; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    quad -= v.dot(llt.solve(v));
  }
  const int My = static_cast<int>(problem_.A.rows());
  lp += -0.5 * (My * std::log(2.0 * std::numbers::pi) + logdet + quad);
  return lp;
}

double log_collapsed_posterior(const GroupedRegressionProblem& problem, const ChainState& state,
                               const McmcConfig& cfg) {
  return CollapsedPosterior(problem)(state.s, state.gamma, state.sigma2, cfg);
}

SweepResult gibbs_sweep(const CollapsedPosterior& post, const GroupedRegressionProblem& problem,
                        ChainState& state, const McmcConfig& cfg, std::mt19937_64& rng,
                        const Eigen::VectorXd& gamma_rw, const Eigen::VectorXd& sigma_rw) {
  SweepResult out;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // s-move: uniform single coordinate flip, symmetric proposal
  {
    std::uniform_int_distribution<int> pick(0, problem.groups() - 1);
    const int k = pick(rng);
    Eigen::VectorXi sp = state.s;
    sp(k) = 1 - sp(k);
    const double lp = post(sp, state.gamma, state.sigma2, cfg);
    if (std::log(unif(rng)) < lp - state.log_posterior) {
      state.s = sp;
      state.log_posterior = lp;
      out.s_accepted = true;
    }
  }

  // gamma-move: Gaussian random-walk block proposal
  if (!cfg.fix_gamma) {
    Eigen::VectorXd gp = state.gamma;
    for (int j = 0; j < gp.size(); ++j) gp(j) += gamma_rw(j) * normal(rng);
    const double lp = gp.minCoeff() <= 0.0 ? -std::numeric_limits<double>::infinity()
                                           : post(state.s, gp, state.sigma2, cfg);
    if (std::log(unif(rng)) < lp - state.log_posterior) {
      state.gamma = gp;
      state.log_posterior = lp;
      out.gamma_accepted = true;
    }
  }

  // Sigma-move
  if (!cfg.fix_sigma) {
    Eigen::VectorXd sp = state.sigma2;
    for (int l = 0; l < sp.size(); ++l) sp(l) += sigma_rw(l) * normal(rng);
    const double lp = sp.minCoeff() <= 0.0 ? -std::numeric_limits<double>::infinity()
                                           : post(state.s, state.gamma, sp, cfg);
    if (std::log(unif(rng)) < lp - state.log_posterior) {
      state.sigma2 = sp;
      state.log_posterior = lp;
      out.sigma_accepted = true;
    }
  }
  return out;
}

SolverResult solve_mcmc(const GroupedRegressionProblem& problem, const McmcConfig& cfg) {
  cfg.validate();
  const int M = problem.groups();
  const int L = problem.L;
  const CollapsedPosterior post(problem);
  std::mt19937_64 rng(cfg.seed);

  ChainState state;
  state.s = Eigen::VectorXi::Ones(M);
  const int ngamma = cfg.scalar_gamma ? 1 : M;
  if (cfg.gamma_fixed.size() > 0) {
    if (cfg.gamma_fixed.size() != ngamma)
      throw std::invalid_argument("solve_mcmc: gamma_fixed has the wrong length");
    state.gamma = cfg.gamma_fixed;
  } else {
    state.gamma = Eigen::VectorXd::Constant(ngamma, cfg.gamma_init);
  }
  if (cfg.sigma2_fixed.size() > 0) {
    if (cfg.sigma2_fixed.size() != L)
      throw std::invalid_argument("solve_mcmc: sigma2_fixed has the wrong length");
    state.sigma2 = cfg.sigma2_fixed;
  } else {
    state.sigma2.resize(L);
    for (int l = 0; l < L; ++l) {
      const auto [b, e] = problem.row_ranges[l];
      const Eigen::VectorXd yl = problem.y.segment(b, e - b);
      const double var =
          (yl.array() - yl.mean()).square().sum() / std::max(1, static_cast<int>(yl.size()));
      state.sigma2(l) = std::max(0.1 * var, 1e-8);
    }
  }
  state.log_posterior = post(state.s, state.gamma, state.sigma2, cfg);

  Eigen::VectorXd gamma_rw = cfg.rw_scale * state.gamma.cwiseAbs();
  Eigen::VectorXd sigma_rw = cfg.rw_scale * state.sigma2.cwiseAbs();

  Eigen::VectorXd incl = Eigen::VectorXd::Zero(M);
  int kept = 0;
  long s_acc = 0, g_acc = 0, sg_acc = 0;
  int g_moves = 0, sg_moves = 0;
  int win_g_acc = 0, win_sg_acc = 0, win_n = 0;
  const int adapt_window = 200;

  for (int it = 0; it < cfg.chain_length; ++it) {
    const SweepResult sw = gibbs_sweep(post, problem, state, cfg, rng, gamma_rw, sigma_rw);
    s_acc += sw.s_accepted;
    if (!cfg.fix_gamma) {
      ++g_moves;
      g_acc += sw.gamma_accepted;
      win_g_acc += sw.gamma_accepted;
    }
    if (!cfg.fix_sigma) {
      ++sg_moves;
      sg_acc += sw.sigma_accepted;
      win_sg_acc += sw.sigma_accepted;
    }
    ++win_n;

    // proposal-scale tuning confined to burn-in; frozen afterwards so the
    // retained samples come from a fixed kernel
    if (cfg.adapt_proposals && it < cfg.burn_in && win_n == adapt_window) {
      if (!cfg.fix_gamma) {
        const double rate = static_cast<double>(win_g_acc) / adapt_window;
        if (rate > 0.5) gamma_rw *= 1.5;
        else if (rate < 0.2) gamma_rw *= 0.5;
      }
      if (!cfg.fix_sigma) {
        const double rate = static_cast<double>(win_sg_acc) / adapt_window;
        if (rate > 0.5) sigma_rw *= 1.5;
        else if (rate < 0.2) sigma_rw *= 0.5;
      }
      win_g_acc = win_sg_acc = win_n = 0;
    }

    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thinning == 0) {
      incl += state.s.cast<double>();
      ++kept;
    }
  }
  if (kept > 0) incl /= kept;

  SolverResult res;
  res.inclusion_probabilities.assign(incl.data(), incl.data() + M);
  res.active.resize(M);
  std::vector<int> active_cols;
  for (int k = 0; k < M; ++k) {
    res.active[k] = incl(k) > cfg.inclusion_threshold;
    if (res.active[k]) {
      const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
      for (int c = b; c < e; ++c) active_cols.push_back(c);
    }
  }

  // point estimate: least squares restricted to the selected groups
  res.weights = Eigen::VectorXd::Zero(problem.cols());
  res.converged = true;
  if (!active_cols.empty()) {
    Eigen::MatrixXd Aact(problem.A.rows(), active_cols.size());
    for (size_t k = 0; k < active_cols.size(); ++k)
      Aact.col(static_cast<int>(k)) = problem.A.col(active_cols[k]);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aact);
    if (cod.rank() < static_cast<Eigen::Index>(active_cols.size())) res.converged = false;
    const Eigen::VectorXd wact = cod.solve(problem.y);
    for (size_t k = 0; k < active_cols.size(); ++k) res.weights(active_cols[k]) = wact(k);
  }
  res.group_norms = group_norms(res.weights, problem);
  res.iterations = cfg.chain_length;
  res.chain_length = cfg.chain_length;
  res.acceptance_rates["s"] = static_cast<double>(s_acc) / cfg.chain_length;
  if (g_moves > 0) res.acceptance_rates["gamma"] = static_cast<double>(g_acc) / g_moves;
  if (sg_moves > 0) res.acceptance_rates["sigma"] = static_cast<double>(sg_acc) / sg_moves;
  res.sigma2_per_experiment.assign(state.sigma2.data(), state.sigma2.data() + state.sigma2.size());
  return res;
}

}  // namespace dynet
