#ifndef DYNET_NETWORK_HPP
#define DYNET_NETWORK_HPP

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dynet/lti.hpp"
#include "json.hpp"

namespace dynet {

/// Directed Boolean structure over {y, u} nodes. An arc (i, j) in `yy`
/// means y_j -> y_i (the (i,j) entry of Q is nonzero); (i, k) in `uy`
/// means u_k -> y_i. All indices 0-based.
struct BooleanNetwork {
  int p = 0;
  int m = 0;
  std::set<std::pair<int, int>> yy;
  std::set<std::pair<int, int>> uy;

  int arc_count() const { return static_cast<int>(yy.size() + uy.size()); }
  double density() const { return p > 0 ? static_cast<double>(yy.size()) / (p * p) : 0.0; }
  bool operator==(const BooleanNetwork& o) const {
    return p == o.p && m == o.m && yy == o.yy && uy == o.uy;
  }
};

/// Network of per-output ARX(MAX) rows: monic A_i, off-diagonal B^y_{ij},
/// B^u_{ik}, optional monic C_i. All polynomials discrete in q^-1; the B
/// polynomials have zero constant term.
struct ArxNetworkModel {
  int p = 0;
  int m = 0;
  std::vector<Polynomial> A;                 // size p, monic
  std::vector<std::vector<Polynomial>> By;   // p x p, diagonal entries zero
  std::vector<std::vector<Polynomial>> Bu;   // p x m
  std::vector<Polynomial> C;                 // size p when ARMAX, empty when ARX

  bool is_armax() const { return !C.empty(); }
  void validate() const;
  double max_abs_coeff() const;
};

struct DsfModel {
  int p = 0;
  int m = 0;
  Domain domain = Domain::Discrete;
  std::vector<RationalTransferFunction> Q;  // p x p row-major, zero diagonal
  std::vector<RationalTransferFunction> P;  // p x m
  std::vector<RationalTransferFunction> H;  // p x p

  const RationalTransferFunction& q(int i, int j) const { return Q[i * p + j]; }
  const RationalTransferFunction& pf(int i, int k) const { return P[i * m + k]; }
  const RationalTransferFunction& h(int i, int j) const { return H[i * p + j]; }
  void validate(bool require_diagonal_h = false) const;
};

struct StateSpaceModel {
  Eigen::MatrixXd A;  // n x n
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd C;  // p x n, full row rank
  Eigen::MatrixXd D;  // p x m
  Eigen::MatrixXd K;  // n x p
  Eigen::MatrixXd R;  // p x p noise covariance
  std::optional<Eigen::VectorXd> m0;
  std::optional<Eigen::MatrixXd> R0;
  Domain domain = Domain::Discrete;

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(C.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
};

/// DSF of a state-space model with full-row-rank C: block transformation
/// splitting measured and hidden states, elimination of the hidden block,
/// diagonal extraction and the final (Q, P, H) assembly. The result is
/// invariant to the null-space basis used for the hidden block.
DsfModel dsf_from_state_space(const StateSpaceModel& ss);

/// Same as dsf_from_state_space but with a caller-supplied null-space basis
/// of C (n x (n-p), columns spanning ker C). Used to test basis invariance.
DsfModel dsf_from_state_space(const StateSpaceModel& ss, const Eigen::MatrixXd& null_basis);

/// Entrywise Q = By/A_i, P = Bu/A_i, H = C/A_i (identity C when ARX).
DsfModel arx_to_dsf(const ArxNetworkModel& arx);

BooleanNetwork boolean_structure(const DsfModel& dsf, double tol = -1.0);
BooleanNetwork boolean_structure(const ArxNetworkModel& arx, double tol = -1.0);

/// Zero/nonzero pattern of Q for a state-space model, decided from sampled
/// frequency responses of the hidden-block elimination. Cheap for large
/// hidden dimension where the full rational DSF is not needed.
BooleanNetwork dsf_structure_from_state_space(const StateSpaceModel& ss, double tol = 1e-8);

/// Entrywise stability of Q, P, H plus root locations of det(I - Q) after
/// clearing denominators.
bool dsf_is_stable(const DsfModel& dsf);

/// Stability of an ARX network: stable rows plus det(A - By) root check.
bool arx_is_stable(const ArxNetworkModel& arx);

// --- JSON serialization (schema "dynet/v1") ---
nlohmann::json to_json(const ArxNetworkModel& m);
nlohmann::json to_json(const BooleanNetwork& n);
nlohmann::json to_json(const StateSpaceModel& ss);
ArxNetworkModel arx_from_json(const nlohmann::json& j);
BooleanNetwork boolean_from_json(const nlohmann::json& j);
StateSpaceModel state_space_from_json(const nlohmann::json& j);

}  // namespace dynet

#endif  // DYNET_NETWORK_HPP
