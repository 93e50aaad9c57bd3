#include "dynet/regression.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dynet {

void ExperimentData::validate() const {
  if (y.rows() < 1) throw std::invalid_argument("ExperimentData: empty time series");
  if (u.rows() != y.rows()) throw std::invalid_argument("ExperimentData: y/u row count mismatch");
  if (!y.allFinite() || !u.allFinite())
    throw std::invalid_argument("ExperimentData: non-finite entries");
}

std::vector<int> GroupOrders::rho() const {
  std::vector<int> r;
  r.reserve(groups());
  r.insert(r.end(), by.begin(), by.end());
  r.insert(r.end(), bu.begin(), bu.end());
  if (is_armax()) r.push_back(nc);
  return r;
}

int GroupOrders::max_lag() const {
  int ml = 0;
  for (int v : by) ml = std::max(ml, v);
  for (int v : bu) ml = std::max(ml, v);
  ml = std::max(ml, nc);
  return ml;
}

void GroupOrders::validate() const {
  if (output < 0 || output >= p()) throw std::invalid_argument("GroupOrders: output out of range");
  for (int v : by)
    if (v < 1) throw std::invalid_argument("GroupOrders: orders must be >= 1");
  for (int v : bu)
    if (v < 1) throw std::invalid_argument("GroupOrders: orders must be >= 1");
}

std::vector<int> GroupedRegressionProblem::rho_large() const {
  std::vector<int> r = rho;
  for (int& v : r) v *= L;
  return r;
}

std::vector<int> GroupedRegressionProblem::rho_small() const {
  std::vector<int> r;
  r.reserve(rho.size() * L);
  for (int v : rho)
    for (int l = 0; l < L; ++l) r.push_back(v);
  return r;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regressors(const ExperimentData& data,
                                                             const GroupOrders& orders) {
  data.validate();
  orders.validate();
  if (orders.is_armax())
    throw std::invalid_argument(
        "build_regressors: ARMAX prediction-error columns are not supported; only the ARX case "
        "can be solved");
  if (data.p() != orders.p() || data.m() != orders.m())
    throw std::invalid_argument("build_regressors: dimension mismatch between data and orders");

  const int i = orders.output;
  const int maxlag = orders.max_lag();
  const int N = data.samples();
  if (N <= maxlag) throw std::invalid_argument("build_regressors: insufficient samples");

  const std::vector<int> rho = orders.rho();
  const int cols = std::accumulate(rho.begin(), rho.end(), 0);
  const int rows = N - maxlag;

  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd y(rows);
  for (int row = 0; row < rows; ++row) {
    const int t = maxlag + row;
    int c = 0;
    for (int j = 0; j < orders.p(); ++j) {
      const double sign = (j == i) ? -1.0 : 1.0;
      for (int lag = 1; lag <= orders.by[j]; ++lag) A(row, c++) = sign * data.y(t - lag, j);
    }
    for (int k = 0; k < orders.m(); ++k)
      for (int lag = 1; lag <= orders.bu[k]; ++lag) A(row, c++) = data.u(t - lag, k);
    y(row) = data.y(t, i);
  }
  return {std::move(A), std::move(y)};
}

GroupedRegressionProblem stack_experiments(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& problems,
    const GroupOrders& orders) {
  if (problems.empty()) throw std::invalid_argument("stack_experiments: no experiments");
  const std::vector<int> rho = orders.rho();
  const int cols1 = std::accumulate(rho.begin(), rho.end(), 0);
  const int L = static_cast<int>(problems.size());
  int total_rows = 0;
  for (const auto& [Al, yl] : problems) {
    if (Al.cols() != cols1)
      throw std::invalid_argument("stack_experiments: experiments must share identical orders");
    if (Al.rows() != yl.size())
      throw std::invalid_argument("stack_experiments: design/response row mismatch");
    total_rows += static_cast<int>(Al.rows());
  }

  GroupedRegressionProblem out;
  out.rho = rho;
  out.L = L;
  out.output = orders.output;
  out.A = Eigen::MatrixXd::Zero(total_rows, L * cols1);
  out.y.resize(total_rows);

  std::vector<int> group_offset(rho.size());  // column of group k in a single experiment
  for (size_t k = 1; k < rho.size(); ++k) group_offset[k] = group_offset[k - 1] + rho[k - 1];

  int row0 = 0;
  for (int l = 0; l < L; ++l) {
    const auto& [Al, yl] = problems[l];
    const int nl = static_cast<int>(Al.rows());
    out.row_ranges.push_back({row0, row0 + nl});
    out.y.segment(row0, nl) = yl;
    for (size_t k = 0; k < rho.size(); ++k) {
      const int dst = L * group_offset[static_cast<int>(k)] + l * rho[k];
      out.A.block(row0, dst, nl, rho[k]) = Al.middleCols(group_offset[k], rho[k]);
    }
    row0 += nl;
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack_homogeneous(
    const std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>>& problems) {
  if (problems.empty()) throw std::invalid_argument("stack_homogeneous: no experiments");
  const int cols = static_cast<int>(problems[0].first.cols());
  int total_rows = 0;
  for (const auto& [Al, yl] : problems) {
    if (Al.cols() != cols)
      throw std::invalid_argument("stack_homogeneous: experiments must share identical orders");
    total_rows += static_cast<int>(Al.rows());
  }
  Eigen::MatrixXd A(total_rows, cols);
  Eigen::VectorXd y(total_rows);
  int row0 = 0;
  for (const auto& [Al, yl] : problems) {
    A.middleRows(row0, Al.rows()) = Al;
    y.segment(row0, yl.size()) = yl;
    row0 += static_cast<int>(Al.rows());
  }
  return {std::move(A), std::move(y)};
}

std::pair<int, int> block_columns_small(int kE, const std::vector<int>& rho, int L) {
  const int M = static_cast<int>(rho.size());
  if (kE < 0 || kE >= L * M) throw std::out_of_range("block_columns_small: index out of range");
  // closed-form index map: group = ceil((kE+1)/L) - 1, experiment = kE mod L
  const int g = kE / L;
  const int l = kE % L;
  int base = 0;
  for (int j = 0; j < g; ++j) base += rho[j];
  const int begin = L * base + l * rho[g];
  return {begin, begin + rho[g]};
}

std::pair<int, int> block_columns_large(int kS, const std::vector<int>& rho, int L) {
  const int M = static_cast<int>(rho.size());
  if (kS < 0 || kS >= M) throw std::out_of_range("block_columns_large: index out of range");
  int base = 0;
  for (int j = 0; j < kS; ++j) base += rho[j];
  return {L * base, L * base + L * rho[kS]};
}

Eigen::VectorXd group_norms(const Eigen::VectorXd& w, const std::vector<int>& rho, int L) {
  int cols = 0;
  for (int v : rho) cols += L * v;
  if (w.size() != cols) throw std::invalid_argument("group_norms: weight length mismatch");
  Eigen::VectorXd norms(rho.size());
  for (size_t k = 0; k < rho.size(); ++k) {
    const auto [b, e] = block_columns_large(static_cast<int>(k), rho, L);
    norms(static_cast<int>(k)) = w.segment(b, e - b).norm();
  }
  return norms;
}

Eigen::VectorXd group_norms(const Eigen::VectorXd& w, const GroupedRegressionProblem& problem) {
  return group_norms(w, problem.rho, problem.L);
}

ExperimentData read_experiment_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

  int p = 0, m = 0;
  {
    std::stringstream ss(line);
    std::string field;
    int idx = 0;
    while (std::getline(ss, field, ',')) {
      if (idx == 0) {
        if (field != "t") throw std::runtime_error(path + ": header must start with 't'");
      } else if (field.rfind('y', 0) == 0) {
        ++p;
      } else if (field.rfind('u', 0) == 0) {
        ++m;
      } else {
        throw std::runtime_error(path + ": unexpected header field '" + field + "'");
      }
      ++idx;
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
    }
    if (static_cast<int>(vals.size()) != 1 + p + m)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wrong field count");
    times.push_back(vals[0]);
    vals.erase(vals.begin());
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  ExperimentData data;
  data.y.resize(rows.size(), p);
  data.u.resize(rows.size(), m);
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j < p; ++j) data.y(static_cast<int>(r), j) = rows[r][j];
    for (int k = 0; k < m; ++k) data.u(static_cast<int>(r), k) = rows[r][p + k];
  }
  if (times.size() >= 2) {
    const double dt = times[1] - times[0];
    for (size_t k = 2; k < times.size(); ++k)
      if (std::abs((times[k] - times[k - 1]) - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
        throw std::runtime_error(path + ": non-uniform sampling at row " + std::to_string(k + 1));
    data.sample_period = dt;
  }
  data.validate();
  return data;
}

void write_experiment_csv(const std::string& path, const ExperimentData& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  out << "t";
  for (int j = 1; j <= data.p(); ++j) out << ",y" << j;
  for (int k = 1; k <= data.m(); ++k) out << ",u" << k;
  out << "\n";
  out.precision(17);
  for (int r = 0; r < data.samples(); ++r) {
    out << r * data.sample_period;
    for (int j = 0; j < data.p(); ++j) out << "," << data.y(r, j);
    for (int k = 0; k < data.m(); ++k) out << "," << data.u(r, k);
    out << "\n";
  }
}

}  // namespace dynet
