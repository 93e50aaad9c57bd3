#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dynet/netgen.hpp"
#include "dynet/solver_sbl.hpp"

using namespace dynet;

namespace {

GroupedRegressionProblem scalar_problem(double a, double yv) {
  GroupedRegressionProblem p;
  p.rho = {1};
  p.L = 1;
  p.A = Eigen::MatrixXd::Constant(1, 1, a);
  p.y = Eigen::VectorXd::Constant(1, yv);
  p.row_ranges = {{0, 1}};
  return p;
}

GroupedRegressionProblem random_problem(int rows, int M, int rho_k, int L,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  GroupedRegressionProblem p;
  p.rho.assign(M, rho_k);
  p.L = L;
  p.A.resize(rows, M * rho_k * L);
  p.y.resize(rows);
  for (int r = 0; r < rows; ++r) {
    p.y(r) = normal(rng);
    for (int c = 0; c < p.A.cols(); ++c) p.A(r, c) = normal(rng);
  }
  const int per = rows / L;
  for (int l = 0; l < L; ++l)
    p.row_ranges.push_back({l * per, l == L - 1 ? rows : (l + 1) * per});
  return p;
}

// dense direct evaluation of the marginal likelihood
double dense_evidence(const GroupedRegressionProblem& p, const Eigen::VectorXd& gamma,
                      const Eigen::VectorXd& sigma2) {
  const int n = static_cast<int>(p.A.rows());
  Eigen::VectorXd colg(p.cols());
  for (int k = 0; k < p.groups(); ++k) {
    const auto [b, e] = block_columns_large(k, p.rho, p.L);
    for (int c = b; c < e; ++c) colg(c) = gamma(k);
  }
  Eigen::MatrixXd Sy = p.A * colg.asDiagonal() * p.A.transpose();
  for (size_t l = 0; l < p.row_ranges.size(); ++l) {
    const auto [b, e] = p.row_ranges[l];
    for (int r = b; r < e; ++r) Sy(r, r) += sigma2(static_cast<int>(l));
  }
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + std::log(Sy.determinant()) +
                 p.y.dot(Sy.inverse() * p.y));
}

}  // namespace

TEST_CASE("evidence closed forms") {
  // Gamma = 0, Sigma = I
  std::mt19937_64 rng(1);
  GroupedRegressionProblem p = random_problem(8, 2, 2, 1, rng);
  const Eigen::VectorXd zero_gamma = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd unit_sigma = Eigen::VectorXd::Ones(1);
  const double expected = -0.5 * (8 * std::log(2.0 * std::numbers::pi) + p.y.squaredNorm());
  CHECK(sbl_evidence(p, zero_gamma, unit_sigma) == doctest::Approx(expected).epsilon(1e-12));

  // scalar A=[1], y=[2], gamma=1, sigma^2=1: Sigma_y = 2
  const GroupedRegressionProblem s = scalar_problem(1.0, 2.0);
  const double hand = -0.5 * (std::log(2.0 * std::numbers::pi) + std::log(2.0) + 2.0);
  CHECK(sbl_evidence(s, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)) ==
        doctest::Approx(hand).epsilon(1e-12));
}

TEST_CASE("evidence matches dense direct computation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    // both branches: tall (Woodbury) and wide (dense) problems
    GroupedRegressionProblem p =
        trial % 2 ? random_problem(30, 3, 2, 2, rng) : random_problem(6, 3, 2, 2, rng);
    Eigen::VectorXd gamma(3), sigma2(2);
    for (int k = 0; k < 3; ++k) gamma(k) = unif(rng);
    for (int l = 0; l < 2; ++l) sigma2(l) = unif(rng);
    CHECK(sbl_evidence(p, gamma, sigma2) ==
          doctest::Approx(dense_evidence(p, gamma, sigma2)).epsilon(1e-10));
  }
}

TEST_CASE("posterior closed forms") {
  // A = 0: mu = 0, Sigma_w = Gamma
  GroupedRegressionProblem p = scalar_problem(0.0, 1.0);
  {
    const auto [mu, Sw] = sbl_posterior(p, 2.5 * Eigen::VectorXd::Ones(1),
                                        Eigen::VectorXd::Ones(1));
    CHECK(mu(0) == doctest::Approx(0.0));
    CHECK(Sw(0, 0) == doctest::Approx(2.5));
  }
  // scalar A=[1], y=[2]: Sigma_w = 1/2, mu = 1
  const GroupedRegressionProblem s = scalar_problem(1.0, 2.0);
  const auto [mu, Sw] = sbl_posterior(s, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
  CHECK(mu(0) == doctest::Approx(1.0));
  CHECK(Sw(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("Woodbury identity for the posterior mean") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    GroupedRegressionProblem p = random_problem(24, 3, 2, 2, rng);
    Eigen::VectorXd gamma(3), sigma2(2);
    for (int k = 0; k < 3; ++k) gamma(k) = unif(rng);
    for (int l = 0; l < 2; ++l) sigma2(l) = unif(rng);

    const Eigen::VectorXd mu = sbl_posterior(p, gamma, sigma2).first;

    // mu = Gamma A^T Sigma_y^{-1} y
    Eigen::VectorXd colg(p.cols());
    for (int k = 0; k < 3; ++k) {
      const auto [b, e] = block_columns_large(k, p.rho, p.L);
      for (int c = b; c < e; ++c) colg(c) = gamma(k);
    }
    Eigen::MatrixXd Sy = p.A * colg.asDiagonal() * p.A.transpose();
    for (size_t l = 0; l < p.row_ranges.size(); ++l) {
      const auto [b, e] = p.row_ranges[l];
      for (int r = b; r < e; ++r) Sy(r, r) += sigma2(static_cast<int>(l));
    }
    const Eigen::VectorXd mu2 = colg.asDiagonal() * p.A.transpose() * Sy.llt().solve(p.y);
    CHECK((mu - mu2).norm() < 1e-9 * (1.0 + mu.norm()));
  }
}

TEST_CASE("em_step scalar hand example") {
  const GroupedRegressionProblem s = scalar_problem(1.0, 2.0);
  SblConfig cfg;
  cfg.prune_threshold = 0.0;
  SblState state;
  state.active_groups = {0};
  state.gamma = Eigen::VectorXd::Ones(1);
  state.sigma2 = Eigen::VectorXd::Ones(1);
  sbl_em_step(s, state, cfg);
  // gamma' = mu^2 + Sigma_w = 1 + 0.5
  CHECK(state.gamma(0) == doctest::Approx(1.5));
}

TEST_CASE("EM evidence is non-decreasing") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    GroupedRegressionProblem p = random_problem(40, 4, 2, 2, rng);
    SblConfig cfg;
    cfg.prune_threshold = 0.0;  // keep every group so the trace is pure EM
    cfg.max_iters = 100;
    cfg.tol = 1e-14;
    const SolverResult res = solve_sbl(p, cfg);
    REQUIRE(res.evidence_trace.size() > 2);
    for (size_t k = 1; k < res.evidence_trace.size(); ++k)
      CHECK(res.evidence_trace[k] >= res.evidence_trace[k - 1] - 1e-10);
  }
}

TEST_CASE("pruning a vanishing group leaves the evidence unchanged") {
  std::mt19937_64 rng(9);
  GroupedRegressionProblem p = random_problem(20, 3, 2, 1, rng);
  Eigen::VectorXd gamma(3), sigma2(1);
  gamma << 0.7, 1e-14, 1.3;
  sigma2 << 0.5;
  Eigen::VectorXd pruned = gamma;
  pruned(1) = 0.0;
  CHECK(sbl_evidence(p, gamma, sigma2) ==
        doctest::Approx(sbl_evidence(p, pruned, sigma2)).epsilon(1e-9));
}

TEST_CASE("all-zero response gives an empty structure") {
  std::mt19937_64 rng(11);
  GroupedRegressionProblem p = random_problem(20, 3, 2, 1, rng);
  p.y.setZero();
  const SolverResult res = solve_sbl(p, SblConfig{});
  for (bool a : res.active) CHECK_FALSE(a);
  CHECK(res.weights.isZero());
}

TEST_CASE("structure recovery and noise variance estimation") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> normal(0.0, 1.0);
  GroupedRegressionProblem p = random_problem(500 * 2, 6, 2, 2, rng);
  Eigen::VectorXd w0 = Eigen::VectorXd::Zero(p.cols());
  // two active groups (0 and 3)
  const auto [b0, e0] = block_columns_large(0, p.rho, p.L);
  const auto [b3, e3] = block_columns_large(3, p.rho, p.L);
  for (int c = b0; c < e0; ++c) w0(c) = 1.0 + std::abs(normal(rng));
  for (int c = b3; c < e3; ++c) w0(c) = 1.0 + std::abs(normal(rng));

  const double true_s1 = 0.25, true_s2 = 1.0;  // heterogeneous noise
  p.y = p.A * w0;
  for (int r = 0; r < p.y.size(); ++r)
    p.y(r) += normal(rng) * std::sqrt(r < p.row_ranges[0].second ? true_s1 : true_s2);

  const SolverResult res = solve_sbl(p, SblConfig{});
  CHECK(res.active[0]);
  CHECK(res.active[3]);
  int active = 0;
  for (bool a : res.active) active += a;
  CHECK(active == 2);
  REQUIRE(res.sigma2_per_experiment.size() == 2);
  CHECK(res.sigma2_per_experiment[0] == doctest::Approx(true_s1).epsilon(0.3));
  CHECK(res.sigma2_per_experiment[1] == doctest::Approx(true_s2).epsilon(0.3));
}

TEST_CASE("noise-free recovery on a generated network") {
  GenConfig cfg;
  cfg.p = 5;
  cfg.m = 1;
  cfg.density = 0.3;
  cfg.L = 2;
  cfg.N = 300;
  cfg.snr_db = std::numeric_limits<double>::infinity();
  cfg.seed = 99;
  const GeneratedBenchmarkCase bc = generate_case(cfg);

  for (int i = 0; i < cfg.p; ++i) {
    const GroupOrders orders = GroupOrders::uniform(cfg.p, cfg.m, i, 2);
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> per;
    for (const auto& d : bc.data) per.push_back(build_regressors(d, orders));
    const GroupedRegressionProblem problem = stack_experiments(per, orders);
    const SolverResult res = solve_sbl(problem, SblConfig{});
    for (int j = 0; j < cfg.p; ++j) {
      if (j == i) continue;
      CHECK(res.active[j] == (bc.truth.yy.count({i, j}) > 0));
    }
  }
}
