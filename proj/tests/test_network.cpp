#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dynet/netgen.hpp"
#include "dynet/network.hpp"

using namespace dynet;
using cd = std::complex<double>;

namespace {

Eigen::MatrixXcd ss_response(const StateSpaceModel& ss, cd z) {
  const int n = ss.n();
  const Eigen::MatrixXcd resolvent =
      (z * Eigen::MatrixXcd::Identity(n, n) - ss.A.cast<cd>()).inverse();
  return ss.C.cast<cd>() * resolvent * ss.B.cast<cd>() + ss.D.cast<cd>();
}

Eigen::MatrixXcd dsf_closed_loop(const DsfModel& dsf, cd z) {
  Eigen::MatrixXcd Q(dsf.p, dsf.p), P(dsf.p, dsf.m);
  for (int i = 0; i < dsf.p; ++i)
    for (int j = 0; j < dsf.p; ++j) Q(i, j) = evaluate(dsf.q(i, j), z);
  for (int i = 0; i < dsf.p; ++i)
    for (int k = 0; k < dsf.m; ++k) P(i, k) = evaluate(dsf.pf(i, k), z);
  return (Eigen::MatrixXcd::Identity(dsf.p, dsf.p) - Q).inverse() * P;
}

StateSpaceModel random_ss(int n, int p, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  StateSpaceModel ss;
  ss.A.setZero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) ss.A(i, j) = 0.4 * unif(rng) / n;
  for (int i = 0; i < n; ++i) ss.A(i, i) += 0.3 * unif(rng);
  ss.B.resize(n, m);
  ss.C.setZero(p, n);
  ss.C.leftCols(p).setIdentity();
  ss.D.setZero(p, m);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) ss.B(i, k) = unif(rng);
  return ss;
}

}  // namespace

TEST_CASE("dsf_from_state_space scalar system") {
  StateSpaceModel ss;
  const double a = 0.4, b = 1.7;
  ss.A = Eigen::MatrixXd::Constant(1, 1, a);
  ss.B = Eigen::MatrixXd::Constant(1, 1, b);
  ss.C = Eigen::MatrixXd::Identity(1, 1);
  ss.D = Eigen::MatrixXd::Zero(1, 1);
  const DsfModel dsf = dsf_from_state_space(ss);
  CHECK(dsf.q(0, 0).is_zero());
  for (double w : {0.3, 1.1, 2.0}) {
    const cd z = std::polar(1.0, w);
    CHECK(std::abs(evaluate(dsf.pf(0, 0), z) - b / (z - a)) < 1e-10);
    CHECK(std::abs(evaluate(dsf.h(0, 0), z) - 1.0) < 1e-10);
  }
}

TEST_CASE("dsf_from_state_space with no hidden states") {
  std::mt19937_64 rng(5);
  StateSpaceModel ss = random_ss(3, 3, 2, rng);
  ss.A = Eigen::Vector3d(0.2, -0.3, 0.5).asDiagonal();
  const DsfModel dsf = dsf_from_state_space(ss);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(dsf.q(i, j).is_zero());
  for (double w : {0.4, 1.3}) {
    const cd z = std::polar(1.0, w);
    const Eigen::MatrixXcd ref = ss_response(ss, z);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 2; ++k)
        CHECK(std::abs(evaluate(dsf.pf(i, k), z) - ref(i, k)) < 1e-9);
  }
}

TEST_CASE("dsf_from_state_space round trip on random systems") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const StateSpaceModel ss = random_ss(4, 2, 1, rng);
    const DsfModel dsf = dsf_from_state_space(ss);
    for (int i = 0; i < 2; ++i) CHECK(dsf.q(i, i).is_zero());
    for (int k = 0; k < 16; ++k) {
      const cd z = std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.25) / 16.0);
      const Eigen::MatrixXcd lhs = dsf_closed_loop(dsf, z);
      const Eigen::MatrixXcd rhs = ss_response(ss, z);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("dsf invariance to the null-space basis") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const StateSpaceModel ss = random_ss(5, 2, 1, rng);
    const DsfModel d1 = dsf_from_state_space(ss);

    // a different basis of ker C: rotate the default one
    Eigen::MatrixXd E(5, 3);
    E.setZero();
    E.bottomRows(3).setIdentity();  // C = [I 0] so ker C = span of last rows
    Eigen::MatrixXd R = Eigen::MatrixXd::Random(3, 3);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    E = E * Eigen::MatrixXd(qr.householderQ());
    const DsfModel d2 = dsf_from_state_space(ss, E);

    for (int k = 0; k < 8; ++k) {
      const cd z = std::polar(1.0, 0.2 + 0.4 * k);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(std::abs(evaluate(d1.q(i, j), z) - evaluate(d2.q(i, j), z)) < 1e-8);
    }
  }
}

TEST_CASE("dsf_from_state_space rejects rank-deficient C") {
  StateSpaceModel ss;
  ss.A = Eigen::MatrixXd::Identity(2, 2) * 0.5;
  ss.B = Eigen::MatrixXd::Ones(2, 1);
  ss.C = Eigen::MatrixXd::Zero(2, 2);
  ss.C(0, 0) = 1.0;
  ss.C(1, 0) = 1.0;
  ss.D = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS(dsf_from_state_space(ss));
}

TEST_CASE("arx_to_dsf") {
  ArxNetworkModel arx;
  arx.p = 2;
  arx.m = 0;
  arx.A = {Polynomial({1.0, -0.3}), Polynomial::constant(1.0)};
  arx.By.assign(2, std::vector<Polynomial>(2, Polynomial::zero()));
  arx.Bu.assign(2, std::vector<Polynomial>(0));
  arx.By[0][1] = Polynomial({0.0, 0.5});
  const DsfModel dsf = arx_to_dsf(arx);
  for (double w : {0.5, 1.7}) {
    const cd z = std::polar(1.0, w);
    const cd expect = (0.5 / z) / (1.0 - 0.3 / z);
    CHECK(std::abs(evaluate(dsf.q(0, 1), z) - expect) < 1e-12);
  }
  CHECK(dsf.q(1, 0).is_zero());
  // ARX has identity C, so H_ii = 1/A_i
  CHECK(std::abs(evaluate(dsf.h(0, 0), 1.0) - 1.0 / 0.7) < 1e-12);
}

TEST_CASE("boolean_structure") {
  ArxNetworkModel arx;
  arx.p = 2;
  arx.m = 1;
  arx.A = {Polynomial::constant(1.0), Polynomial::constant(1.0)};
  arx.By.assign(2, std::vector<Polynomial>(2, Polynomial::zero()));
  arx.Bu.assign(2, std::vector<Polynomial>(1, Polynomial::zero()));

  CHECK(boolean_structure(arx).yy.empty());

  arx.By[0][1] = Polynomial({0.0, 0.5});
  const BooleanNetwork net = boolean_structure(arx);
  CHECK(net.yy == std::set<std::pair<int, int>>{{0, 1}});

  // structure preserved through the DSF conversion
  CHECK(boolean_structure(arx_to_dsf(arx)) == net);
}

TEST_CASE("boolean structure preserved for generated models") {
  std::mt19937_64 rng(31);
  GenConfig cfg;
  cfg.p = 6;
  cfg.density = 0.25;
  for (int trial = 0; trial < 5; ++trial) {
    const BooleanNetwork structure = random_boolean_structure(cfg.p, cfg.density, 2, rng);
    const ArxNetworkModel model = stabilize_network(structure, cfg, rng);
    BooleanNetwork got = boolean_structure(model);
    got.m = structure.m;
    CHECK(got.yy == structure.yy);
    CHECK(boolean_structure(arx_to_dsf(model)).yy == structure.yy);
  }
}

TEST_CASE("dsf_is_stable") {
  const Polynomial one = Polynomial::constant(1.0);
  DsfModel dsf;
  dsf.p = 2;
  dsf.m = 1;
  dsf.Q.assign(4, RationalTransferFunction());
  dsf.P.assign(2, RationalTransferFunction(one, Polynomial({1.0, -0.5})));
  dsf.H.assign(4, RationalTransferFunction());
  dsf.H[0] = RationalTransferFunction::constant(1.0);
  dsf.H[3] = RationalTransferFunction::constant(1.0);
  CHECK(dsf_is_stable(dsf));

  // single loop with small gain: Q_01 Q_10 with product gain < 1
  dsf.Q[1] = RationalTransferFunction(Polynomial({0.0, 0.4}), Polynomial({1.0, -0.2}));
  dsf.Q[2] = RationalTransferFunction(Polynomial({0.0, 0.4}), Polynomial({1.0, -0.2}));
  CHECK(dsf_is_stable(dsf));

  // unstable entry
  dsf.P[0] = RationalTransferFunction(one, Polynomial({1.0, -1.1}));
  CHECK_FALSE(dsf_is_stable(dsf));
}

TEST_CASE("arx model JSON round trip") {
  std::mt19937_64 rng(37);
  GenConfig cfg;
  cfg.p = 4;
  cfg.density = 0.3;
  const BooleanNetwork structure = random_boolean_structure(cfg.p, cfg.density, 1, rng);
  ArxNetworkModel model = stabilize_network(structure, cfg, rng);
  const ArxNetworkModel back = arx_from_json(to_json(model));
  CHECK(back.p == model.p);
  CHECK(back.m == model.m);
  for (int i = 0; i < model.p; ++i) {
    CHECK(back.A[i] == model.A[i]);
    for (int j = 0; j < model.p; ++j) CHECK(back.By[i][j] == model.By[i][j]);
  }

  BooleanNetwork net = structure;
  net.m = 1;
  net.uy.insert({0, 0});
  CHECK(boolean_from_json(to_json(net)) == net);
}

TEST_CASE("dsf_structure_from_state_space matches rational pattern") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const StateSpaceModel ss = random_ss(5, 2, 1, rng);
    const BooleanNetwork sampled = dsf_structure_from_state_space(ss);
    const BooleanNetwork exact = boolean_structure(dsf_from_state_space(ss), 1e-8);
    CHECK(sampled.yy == exact.yy);
  }
}
