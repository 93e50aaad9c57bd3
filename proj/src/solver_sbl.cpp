#include "dynet/solver_sbl.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dynet {

void SblConfig::validate() const {
  if (gamma_init <= 0.0 || sigma2_init_scale <= 0.0 || max_iters < 1 || tol <= 0.0)
    throw std::invalid_argument("SblConfig: all parameters must be positive");
}

namespace {

// Per-column prior variances from per-group gammas; columns of groups with
// gamma == 0 are excluded from `cols`.
struct ColumnSelection {
  std::vector<int> cols;
  Eigen::VectorXd col_gamma;
};

ColumnSelection select_columns(const GroupedRegressionProblem& problem,
                               const Eigen::VectorXd& gamma) {
  ColumnSelection sel;
  for (int k = 0; k < problem.groups(); ++k) {
    if (gamma(k) <= 0.0) continue;
    const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
    for (int c = b; c < e; ++c) sel.cols.push_back(c);
  }
  sel.col_gamma.resize(sel.cols.size());
  int idx = 0;
  for (int k = 0; k < problem.groups(); ++k) {
    if (gamma(k) <= 0.0) continue;
    const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
    for (int c = b; c < e; ++c) sel.col_gamma(idx++) = gamma(k);
  }
  return sel;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& A, const std::vector<int>& cols) {
  Eigen::MatrixXd out(A.rows(), cols.size());
  for (size_t k = 0; k < cols.size(); ++k) out.col(static_cast<int>(k)) = A.col(cols[k]);
  return out;
}

Eigen::VectorXd row_sigma2(const GroupedRegressionProblem& problem, const Eigen::VectorXd& sigma2) {
  Eigen::VectorXd s(problem.A.rows());
  for (size_t l = 0; l < problem.row_ranges.size(); ++l) {
    const auto [b, e] = problem.row_ranges[l];
    s.segment(b, e - b).setConstant(sigma2(static_cast<int>(l)));
  }
  return s;
}

}  // namespace

double sbl_evidence(const GroupedRegressionProblem& problem, const Eigen::VectorXd& gamma,
                    const Eigen::VectorXd& sigma2) {
  if (sigma2.minCoeff() <= 0.0) throw std::invalid_argument("sbl_evidence: sigma2 must be positive");
  const int My = static_cast<int>(problem.A.rows());
  const Eigen::VectorXd rs = row_sigma2(problem, sigma2);
  const ColumnSelection sel = select_columns(problem, gamma);
  const int nc = static_cast<int>(sel.cols.size());

  double logdet, quad;
  if (nc == 0) {
    logdet = rs.array().log().sum();
    quad = (problem.y.array().square() / rs.array()).sum();
  } else if (nc < My) {
    // Woodbury dual on the active columns
    const Eigen::MatrixXd Aact = gather_columns(problem.A, sel.cols);
    const Eigen::VectorXd sg = sel.col_gamma.array().sqrt();
    const Eigen::MatrixXd As = Aact.array().colwise() / rs.array().sqrt();  // Sigma^{-1/2} A
    Eigen::MatrixXd inner = (As.transpose() * As);
    inner = sg.asDiagonal() * inner * sg.asDiagonal();
    inner.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(inner);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("sbl_evidence: Sigma_y factorization failed (ill-conditioned inner matrix)");
    logdet = rs.array().log().sum();
    for (int k = 0; k < nc; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
    const Eigen::VectorXd Aty = Aact.transpose() * (problem.y.array() / rs.array()).matrix();
    const Eigen::VectorXd v = sg.asDiagonal() * Aty;
    quad = (problem.y.array().square() / rs.array()).sum() - v.dot(llt.solve(v));
  } else {
    const Eigen::MatrixXd Aact = gather_columns(problem.A, sel.cols);
    Eigen::MatrixXd Sy = Aact * sel.col_gamma.asDiagonal() * Aact.transpose();
    Sy.diagonal() += rs;
    Eigen::LLT<Eigen::MatrixXd> llt(Sy);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("sbl_evidence: Sigma_y is not positive definite numerically");
    logdet = 0.0;
    for (int k = 0; k < My; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
    quad = problem.y.dot(llt.solve(problem.y));
  }
  return -0.5 * (My * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> sbl_posterior(const GroupedRegressionProblem& problem,
                                                          const Eigen::VectorXd& gamma,
                                                          const Eigen::VectorXd& sigma2) {
  if (sigma2.minCoeff() <= 0.0) throw std::invalid_argument("sbl_posterior: sigma2 must be positive");
  const ColumnSelection sel = select_columns(problem, gamma);
  const int nc = static_cast<int>(sel.cols.size());
  const int cols = problem.cols();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(cols);
  Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(cols, cols);
  if (nc == 0) return {mu, Sw};

  const Eigen::VectorXd rs = row_sigma2(problem, sigma2);
  const Eigen::MatrixXd Aact = gather_columns(problem.A, sel.cols);
  const Eigen::MatrixXd As = Aact.array().colwise() / rs.array().sqrt();
  Eigen::MatrixXd H = As.transpose() * As;
  H += Eigen::MatrixXd(sel.col_gamma.cwiseInverse().asDiagonal());
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sbl_posterior: posterior precision factorization failed");
  const Eigen::MatrixXd Sw_act = llt.solve(Eigen::MatrixXd::Identity(nc, nc));
  const Eigen::VectorXd mu_act =
      llt.solve(Aact.transpose() * (problem.y.array() / rs.array()).matrix());
  for (int a = 0; a < nc; ++a) {
    mu(sel.cols[a]) = mu_act(a);
    for (int b = 0; b < nc; ++b) Sw(sel.cols[a], sel.cols[b]) = Sw_act(a, b);
  }
  return {mu, Sw};
}

void sbl_em_step(const GroupedRegressionProblem& problem, SblState& state, const SblConfig& cfg) {
  const int L = problem.L;
  const int nact = static_cast<int>(state.active_groups.size());
  if (nact == 0) return;

  // gamma vector over the full group set, zero on pruned groups
  Eigen::VectorXd full_gamma = Eigen::VectorXd::Zero(problem.groups());
  for (int a = 0; a < nact; ++a) full_gamma(state.active_groups[a]) = state.gamma(a);

  state.evidence_trace.push_back(sbl_evidence(problem, full_gamma, state.sigma2));

  // E-step
  auto [mu, Sw] = sbl_posterior(problem, full_gamma, state.sigma2);
  state.mu = mu;
  state.sigma_w = Sw;

  // M-step: gamma per active group
  for (int a = 0; a < nact; ++a) {
    const int k = state.active_groups[a];
    const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
    double acc = 0.0;
    for (int c = b; c < e; ++c) acc += mu(c) * mu(c) + Sw(c, c);
    state.gamma(a) = acc / (L * problem.rho[k]);
  }

  // M-step: per-experiment noise variance (residual block plus the exact
  // posterior trace correction tr(A_l Sigma_w A_l^T))
  const Eigen::VectorXd resid = problem.y - problem.A * mu;
  const Eigen::MatrixXd ASw = problem.A * Sw;
  for (size_t l = 0; l < problem.row_ranges.size(); ++l) {
    const auto [rb, re] = problem.row_ranges[l];
    const int nl = re - rb;
    double trace = (ASw.middleRows(rb, nl).cwiseProduct(problem.A.middleRows(rb, nl))).sum();
    double s2 = (resid.segment(rb, nl).squaredNorm() + trace) / nl;
    const double floor = std::max(cfg.sigma2_floor_scale * problem.y.squaredNorm() /
                                      std::max<int>(1, static_cast<int>(problem.y.size())),
                                  1e-14);
    state.sigma2(static_cast<int>(l)) = std::max(s2, floor);
  }

  // pruning
  if (cfg.prune_threshold > 0.0) {
    const double gmax = state.gamma.maxCoeff();
    const double cut = std::max(cfg.prune_threshold * gmax, 1e-12 * cfg.gamma_init);
    std::vector<int> keep;
    for (int a = 0; a < nact; ++a)
      if (state.gamma(a) >= cut) keep.push_back(a);
    if (static_cast<int>(keep.size()) != nact) {
      std::vector<int> groups;
      Eigen::VectorXd g(keep.size());
      for (size_t k = 0; k < keep.size(); ++k) {
        groups.push_back(state.active_groups[keep[k]]);
        g(static_cast<int>(k)) = state.gamma(keep[k]);
      }
      state.active_groups = std::move(groups);
      state.gamma = std::move(g);
    }
  }
}

SolverResult solve_sbl(const GroupedRegressionProblem& problem, const SblConfig& cfg) {
  cfg.validate();
  const int M = problem.groups();
  const int L = problem.L;

  SblState state;
  state.active_groups.resize(M);
  for (int k = 0; k < M; ++k) state.active_groups[k] = k;
  state.gamma = Eigen::VectorXd::Constant(M, cfg.gamma_init);
  state.sigma2.resize(L);
  for (int l = 0; l < L; ++l) {
    const auto [b, e] = problem.row_ranges[l];
    const Eigen::VectorXd yl = problem.y.segment(b, e - b);
    const double var = (yl.array() - yl.mean()).square().sum() / std::max(1, static_cast<int>(yl.size()));
    state.sigma2(l) = std::max(cfg.sigma2_init_scale * var, 1e-12);
  }

  int it = 0;
  bool converged = false;
  for (; it < cfg.max_iters && !state.active_groups.empty(); ++it) {
    std::vector<int> prev_groups = state.active_groups;
    Eigen::VectorXd prev_gamma = state.gamma;
    sbl_em_step(problem, state, cfg);
    if (state.active_groups == prev_groups) {
      const double dg = ((state.gamma - prev_gamma).cwiseAbs().array() /
                         (1.0 + prev_gamma.cwiseAbs().array()))
                            .maxCoeff();
      if (dg < cfg.tol) {
        converged = true;
        ++it;
        break;
      }
    }
  }

  SolverResult res;
  res.weights = Eigen::VectorXd::Zero(problem.cols());
  res.active.assign(M, false);
  if (!state.active_groups.empty()) {
    Eigen::VectorXd full_gamma = Eigen::VectorXd::Zero(M);
    for (size_t a = 0; a < state.active_groups.size(); ++a)
      full_gamma(state.active_groups[a]) = state.gamma(static_cast<int>(a));
    res.weights = sbl_posterior(problem, full_gamma, state.sigma2).first;
    res.evidence_trace = state.evidence_trace;
    res.evidence_trace.push_back(sbl_evidence(problem, full_gamma, state.sigma2));
    for (int k : state.active_groups) res.active[k] = true;
  } else {
    res.evidence_trace = state.evidence_trace;
  }
  res.group_norms = group_norms(res.weights, problem);
  res.iterations = it;
  res.converged = converged || state.active_groups.empty();
  res.sigma2_per_experiment.assign(state.sigma2.data(), state.sigma2.data() + state.sigma2.size());
  return res;
}

}  // namespace dynet
