#ifndef DYNET_REGRESSION_HPP
#define DYNET_REGRESSION_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace dynet {

/// One experiment's time series: rows are time samples.
struct ExperimentData {
  Eigen::MatrixXd y;  // N x p
  Eigen::MatrixXd u;  // N x m
  double sample_period = 1.0;

  int samples() const { return static_cast<int>(y.rows()); }
  int p() const { return static_cast<int>(y.cols()); }
  int m() const { return static_cast<int>(u.cols()); }
  void validate() const;
};

/// Lag orders for the regression of one output i. Group j < p holds the
/// y_j lags (the i-th group is reinterpreted as the autoregressive block of
/// order n_a); groups p..p+m-1 hold the u lags. ARMAX adds one prediction
/// error group of order n_c, which is representable but refused by the
/// regressor builder.
struct GroupOrders {
  int output = 0;              // index i
  std::vector<int> by;         // length p; entry `output` is n_i^a
  std::vector<int> bu;         // length m
  int nc = 0;                  // 0 means ARX

  static GroupOrders uniform(int p, int m, int output, int order = 2) {
    GroupOrders g;
    g.output = output;
    g.by.assign(p, order);
    g.bu.assign(m, order);
    return g;
  }

  int p() const { return static_cast<int>(by.size()); }
  int m() const { return static_cast<int>(bu.size()); }
  bool is_armax() const { return nc > 0; }
  int groups() const { return p() + m() + (is_armax() ? 1 : 0); }  // M
  std::vector<int> rho() const;
  int max_lag() const;
  void validate() const;
  bool operator==(const GroupOrders& o) const {
    return output == o.output && by == o.by && bu == o.bu && nc == o.nc;
  }
};

/// Stacked multi-experiment grouped regression problem for one output.
/// Columns of large group k are contiguous and ordered by experiment:
/// group k, experiment l starts at L * sum_{j<k} rho_j + l * rho_k.
struct GroupedRegressionProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  std::vector<int> rho;                          // per-group orders, length M
  int L = 1;
  int output = 0;
  std::vector<std::pair<int, int>> row_ranges;   // per experiment [begin, end)

  int groups() const { return static_cast<int>(rho.size()); }
  std::vector<int> rho_large() const;            // rho^S = L * rho
  std::vector<int> rho_small() const;            // rho^E = rho (x) 1_L
  int cols() const { return static_cast<int>(A.cols()); }
};

/// Per-experiment regressor matrix and response for output i (ARX rows of
/// the pseudo-linear regression). Rows are t = maxlag .. N-1; the block for
/// j == i carries -y_i lags so the parameters are the a_{i.} coefficients
/// as printed in the difference equation.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regressors(const ExperimentData& data,
                                                             const GroupOrders& orders);

/// Heterogeneous stacking: per-group block-diagonal layout over experiments.
GroupedRegressionProblem stack_experiments(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& problems,
    const GroupOrders& orders);

/// Homogeneous stacking: plain row concatenation, shared parameter vector.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_homogeneous(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& problems);

/// Column range [begin, end) of the kE-th small group (0-based) in the
/// stacked layout; kE enumerates (group, experiment) pairs group-major.
std::pair<int, int> block_columns_small(int kE, const std::vector<int>& rho, int L);

/// Column range [begin, end) of the kS-th large group (0-based).
std::pair<int, int> block_columns_large(int kS, const std::vector<int>& rho, int L);

/// Per-large-group l2 norms of a stacked weight vector.
Eigen::VectorXd group_norms(const Eigen::VectorXd& w, const GroupedRegressionProblem& problem);
Eigen::VectorXd group_norms(const Eigen::VectorXd& w, const std::vector<int>& rho, int L);

/// CSV with header t,y1..yp,u1..um; one experiment per file.
ExperimentData read_experiment_csv(const std::string& path);
void write_experiment_csv(const std::string& path, const ExperimentData& data);

}  // namespace dynet

#endif  // DYNET_REGRESSION_HPP
