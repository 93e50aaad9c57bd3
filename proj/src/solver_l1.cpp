#include "dynet/solver_l1.hpp"

#include <cmath>
#include <stdexcept>

namespace dynet {

void L1Config::validate() const {
  if (lambda <= 0.0) throw std::invalid_argument("L1Config: lambda must be positive");
  if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("L1Config: beta must be in (0,1)");
  if (eps_floor <= 0.0) throw std::invalid_argument("L1Config: eps floor must be positive");
}

Eigen::VectorXd prox_group(const Eigen::VectorXd& v, double tau) {
  if (tau < 0.0) throw std::invalid_argument("prox_group: negative threshold");
  const double n = v.norm();
  if (n <= tau) return Eigen::VectorXd::Zero(v.size());
  return (1.0 - tau / n) * v;
}

QuadraticProx::QuadraticProx(const Eigen::MatrixXd& A, const Eigen::VectorXd& y)
    : AtA_(A.transpose() * A), Aty_(A.transpose() * y) {}

Eigen::VectorXd QuadraticProx::operator()(const Eigen::VectorXd& v, double gamma) {
  if (gamma != cached_gamma_) {
    Eigen::MatrixXd M = gamma * AtA_;
    M.diagonal().array() += 1.0;
    llt_.compute(M);
    cached_gamma_ = gamma;
  }
  return llt_.solve(gamma * Aty_ + v);
}

double group_lasso_objective(const GroupedRegressionProblem& problem, const Eigen::VectorXd& w,
                             double lambda, const Eigen::VectorXd& nu) {
  const std::vector<int> rhoS = problem.rho_large();
  double obj = 0.5 * (problem.y - problem.A * w).squaredNorm();
  for (int k = 0; k < problem.groups(); ++k) {
    const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
    obj += lambda * nu(k) * std::sqrt(static_cast<double>(rhoS[k])) * w.segment(b, e - b).norm();
  }
  return obj;
}

std::vector<double> epsilon_schedule(const L1Config& cfg) {
  std::vector<double> eps;
  double e = cfg.eps0;
  while (e > cfg.eps_floor * (1.0 + 1e-12)) {
    eps.push_back(e);
    e /= cfg.eps_factor;
  }
  eps.push_back(cfg.eps_floor);
  if (eps.size() >= 2 && std::abs(eps[eps.size() - 2] - cfg.eps_floor) < 1e-15 * cfg.eps_floor)
    eps.pop_back();
  return eps;
}

namespace {

struct AdmmOut {
  Eigen::VectorXd z;
  int iterations = 0;
  bool converged = false;
  std::vector<double> primal, dual;
};

// Algorithm: scaled-dual ADMM on f(w) + g(z), w = z, with a backtracking
// line search on the prox step size.
AdmmOut admm_group_lasso(const GroupedRegressionProblem& problem, QuadraticProx& proxf,
                         const Eigen::VectorXd& nu, const L1Config& cfg,
                         const Eigen::VectorXd& warm) {
  const int dim = problem.cols();
  const std::vector<int> rhoS = problem.rho_large();

  Eigen::VectorXd w = warm, z = warm, u = Eigen::VectorXd::Zero(dim);
  double gamma = cfg.gamma0;
  const double tol = cfg.admm_tol * std::sqrt(static_cast<double>(dim));

  auto fval = [&](const Eigen::VectorXd& x) {
    return 0.5 * (problem.y - problem.A * x).squaredNorm();
  };
  auto grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return proxf.AtA() * x - proxf.Aty();
  };
  auto prox_g = [&](const Eigen::VectorXd& v, double g) {
    Eigen::VectorXd out(dim);
    for (int k = 0; k < problem.groups(); ++k) {
      const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
      const double tau = g * cfg.lambda * nu(k) * std::sqrt(static_cast<double>(rhoS[k]));
      out.segment(b, e - b) = prox_group(v.segment(b, e - b), tau);
    }
    return out;
  };

  AdmmOut out;
  int balance_moves = 0;
  for (int it = 0; it < cfg.admm_max_iters; ++it) {
    // w-update; the backtracking line search picks the initial step size.
    // Later iterations keep gamma fixed (the w-update is an exact proximal
    // step, so ADMM converges for any positive gamma) and rely on residual
    // balancing below — repeating the line search every iteration can only
    // shrink gamma and grinds ill-conditioned problems to a halt.
    Eigen::VectorXd what;
    if (it == 0) {
      const double fw = fval(w);
      const Eigen::VectorXd gw = grad(w);
      for (;;) {
        what = proxf(z - u, gamma);
        const Eigen::VectorXd d = what - w;
        if (fval(what) <= fw + gw.dot(d) + d.squaredNorm() / (2.0 * gamma)) break;
        gamma *= cfg.beta;
        if (gamma < 1e-12) break;
      }
    } else {
      what = proxf(z - u, gamma);
    }
    w = what;
    const Eigen::VectorXd z_prev = z;
    z = prox_g(w + u, gamma);
    u += w - z;

    const double r = (w - z).norm();
    const double s = (z - z_prev).norm() / gamma;
    out.primal.push_back(r);
    out.dual.push_back(s);
    out.iterations = it + 1;
    if (r < tol && s < tol) {
      out.converged = true;
      break;
    }
    // residual balancing: keep primal and dual residuals within a factor of
    // ten of each other; the scaled dual variable tracks gamma. A finite
    // number of adjustments preserves the fixed-step convergence guarantee.
    if (balance_moves < 100 && (it % 5) == 4) {
      if (r > 10.0 * s) {
        gamma *= 0.5;
        u *= 0.5;
        ++balance_moves;
      } else if (s > 10.0 * r) {
        gamma *= 2.0;
        u *= 2.0;
        ++balance_moves;
      }
    }
  }
  out.z = std::move(z);
  return out;
}

SolverResult finish_result(const GroupedRegressionProblem& problem, Eigen::VectorXd w,
                           const L1Config& cfg, bool declare_zeros) {
  SolverResult res;
  Eigen::VectorXd norms = group_norms(w, problem);
  if (declare_zeros && norms.size() > 0) {
    const double cutoff = cfg.zero_threshold * norms.maxCoeff();
    for (int k = 0; k < norms.size(); ++k) {
      if (norms(k) < cutoff) {
        const auto [b, e] = block_columns_large(k, problem.rho, problem.L);
        w.segment(b, e - b).setZero();
        norms(k) = 0.0;
      }
    }
  }
  res.weights = std::move(w);
  res.group_norms = norms;
  res.active.resize(norms.size());
  for (int k = 0; k < norms.size(); ++k) res.active[k] = norms(k) > 0.0;
  return res;
}

}  // namespace

SolverResult solve_group_lasso(const GroupedRegressionProblem& problem, const L1Config& cfg) {
  cfg.validate();
  QuadraticProx proxf(problem.A, problem.y);
  const Eigen::VectorXd nu = Eigen::VectorXd::Ones(problem.groups());
  AdmmOut admm = admm_group_lasso(problem, proxf, nu, cfg,
                                  Eigen::VectorXd::Zero(problem.cols()));
  SolverResult res = finish_result(problem, admm.z, cfg, /*declare_zeros=*/false);
  res.active.assign(problem.groups(), false);
  for (int k = 0; k < res.group_norms.size(); ++k) res.active[k] = res.group_norms(k) > 0.0;
  res.iterations = admm.iterations;
  res.converged = admm.converged;
  res.primal_residuals = std::move(admm.primal);
  res.dual_residuals = std::move(admm.dual);
  res.objective_trace.push_back(group_lasso_objective(problem, res.weights, cfg.lambda, nu));
  return res;
}

SolverResult solve_irl1(const GroupedRegressionProblem& problem, const L1Config& cfg) {
  cfg.validate();
  QuadraticProx proxf(problem.A, problem.y);
  const int M = problem.groups();
  const std::vector<double> eps = epsilon_schedule(cfg);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(problem.cols());
  Eigen::VectorXd nu = Eigen::VectorXd::Ones(M);
  SolverResult res;
  bool all_converged = true;
  int total_iters = 0;

  for (int outer = 0; outer < cfg.outer_max_iters; ++outer) {
    AdmmOut admm = admm_group_lasso(problem, proxf, nu, cfg, w);
    total_iters += admm.iterations;
    all_converged = all_converged && admm.converged;
    res.objective_trace.push_back(group_lasso_objective(problem, admm.z, cfg.lambda, nu));

    const double change = (admm.z - w).norm() / (1.0 + w.norm());
    w = admm.z;
    if (outer > 0 && change < cfg.outer_tol) break;

    // reweighting for the next inner problem
    const Eigen::VectorXd norms = group_norms(w, problem);
    double e;
    if (cfg.adaptive_eps) {
      e = std::max(cfg.eps_floor, 0.1 * norms.maxCoeff());
    } else {
      e = eps[std::min<size_t>(outer, eps.size() - 1)];
    }
    for (int k = 0; k < M; ++k) nu(k) = 1.0 / (norms(k) + e);
  }

  SolverResult out = finish_result(problem, w, cfg, /*declare_zeros=*/true);
  out.iterations = total_iters;
  out.converged = all_converged;
  out.objective_trace = std::move(res.objective_trace);
  return out;
}

std::vector<std::pair<double, double>> lambda_sweep(const GroupedRegressionProblem& problem,
                                                    const L1Config& cfg,
                                                    const std::vector<double>& lambdas) {
  std::vector<std::pair<double, double>> out;
  for (double lam : lambdas) {
    L1Config c = cfg;
    c.lambda = lam;
    const SolverResult r = solve_irl1(problem, c);
    int active = 0;
    for (bool a : r.active) active += a;
    out.push_back({lam, static_cast<double>(active) / problem.groups()});
  }
  return out;
}

}  // namespace dynet
