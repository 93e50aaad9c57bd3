#include "dynet/network.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace dynet {

void ArxNetworkModel::validate() const {
  if (static_cast<int>(A.size()) != p || static_cast<int>(By.size()) != p ||
      static_cast<int>(Bu.size()) != p)
    throw std::invalid_argument("ArxNetworkModel: row count mismatch");
  for (int i = 0; i < p; ++i) {
    if (!A[i].is_monic()) throw std::invalid_argument("ArxNetworkModel: A_i must be monic");
    if (static_cast<int>(By[i].size()) != p || static_cast<int>(Bu[i].size()) != m)
      throw std::invalid_argument("ArxNetworkModel: block size mismatch");
    if (!By[i][i].is_zero()) throw std::invalid_argument("ArxNetworkModel: By diagonal must be zero");
    for (int j = 0; j < p; ++j)
      if (!By[i][j].is_zero() && By[i][j].coeff(0) != 0.0)
        throw std::invalid_argument("ArxNetworkModel: By must have zero constant term");
    for (int k = 0; k < m; ++k)
      if (!Bu[i][k].is_zero() && Bu[i][k].coeff(0) != 0.0)
        throw std::invalid_argument("ArxNetworkModel: Bu must have zero constant term");
  }
  if (!C.empty() && static_cast<int>(C.size()) != p)
    throw std::invalid_argument("ArxNetworkModel: C size mismatch");
}

double ArxNetworkModel::max_abs_coeff() const {
  double v = 0.0;
  for (const auto& a : A) v = std::max(v, a.max_abs_coeff());
  for (const auto& row : By)
    for (const auto& b : row) v = std::max(v, b.max_abs_coeff());
  for (const auto& row : Bu)
    for (const auto& b : row) v = std::max(v, b.max_abs_coeff());
  return v;
}

void DsfModel::validate(bool require_diagonal_h) const {
  for (int i = 0; i < p; ++i) {
    if (!q(i, i).is_zero()) throw std::invalid_argument("DsfModel: Q diagonal must be zero");
    for (int j = 0; j < p; ++j)
      if (i != j && !q(i, j).is_zero() && !q(i, j).strictly_proper())
        throw std::invalid_argument("DsfModel: off-diagonal Q must be strictly proper");
    for (int k = 0; k < m; ++k)
      if (!pf(i, k).proper()) throw std::invalid_argument("DsfModel: P must be proper");
    for (int j = 0; j < p; ++j) {
      if (!h(i, j).proper()) throw std::invalid_argument("DsfModel: H must be proper");
      if (require_diagonal_h && i != j && !h(i, j).is_zero())
        throw std::invalid_argument("DsfModel: H must be diagonal under Assumption 1");
    }
    if (require_diagonal_h && h(i, i).is_zero())
      throw std::invalid_argument("DsfModel: diagonal H must be full rank");
  }
}

namespace {

// Faddeev-LeVerrier: characteristic polynomial of M (ascending in lambda)
// and the adjugate expansion adj(lambda I - M) = sum_k B_k lambda^(r-1-k).
struct CharAdj {
  std::vector<double> charpoly;           // length r+1, ascending
  std::vector<Eigen::MatrixXd> adj;       // B_0..B_{r-1}
};

CharAdj faddeev_leverrier(const Eigen::MatrixXd& M) {
  const int r = static_cast<int>(M.rows());
  CharAdj out;
  out.charpoly.assign(r + 1, 0.0);
  out.charpoly[r] = 1.0;
  Eigen::MatrixXd Bk = Eigen::MatrixXd::Identity(r, r);
  out.adj.push_back(Bk);
  for (int k = 1; k <= r; ++k) {
    const Eigen::MatrixXd Ak = M * Bk;
    const double ak = -Ak.trace() / k;
    out.charpoly[r - k] = ak;
    Bk = Ak + ak * Eigen::MatrixXd::Identity(r, r);
    if (k < r) out.adj.push_back(Bk);
  }
  return out;
}

// Converts num(q)/den(q) given in ascending positive powers of q into the
// domain convention (divide by q^deg(den) for discrete).
RationalTransferFunction make_rtf_ascending(std::vector<double> num, std::vector<double> den,
                                            Domain dom) {
  if (dom == Domain::Continuous)
    return {Polynomial(std::move(num), dom), Polynomial(std::move(den), dom)};
  while (!den.empty() && den.back() == 0.0) den.pop_back();
  const int b = static_cast<int>(den.size()) - 1;
  std::vector<double> n2(b + 1, 0.0), d2(b + 1, 0.0);
  for (int k = 0; k <= b; ++k) {
    d2[k] = den[b - k];
    const int src = b - k;
    if (src < static_cast<int>(num.size())) n2[k] = num[src];
  }
  return {Polynomial(std::move(n2), dom), Polynomial(std::move(d2), dom)};
}

Eigen::MatrixXd default_null_basis(const Eigen::MatrixXd& C) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const int n = static_cast<int>(C.cols());
  const int p = static_cast<int>(C.rows());
  if (svd.singularValues()(p - 1) < 1e-10 * svd.singularValues()(0))
    throw std::invalid_argument(
        "dsf_from_state_space: C is rank deficient; the general-C extraction is not supported");
  return svd.matrixV().rightCols(n - p);
}

}  // namespace

DsfModel dsf_from_state_space(const StateSpaceModel& ss) {
  return dsf_from_state_space(ss, default_null_basis(ss.C));
}

DsfModel dsf_from_state_space(const StateSpaceModel& ss, const Eigen::MatrixXd& E) {
  const int n = ss.n(), p = ss.p(), m = ss.m();
  if (n < p) throw std::invalid_argument("dsf_from_state_space: requires n >= p");
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ss.C);
    if (p > 0 && svd.singularValues()(p - 1) < 1e-10 * svd.singularValues()(0))
      throw std::invalid_argument(
          "dsf_from_state_space: C is rank deficient; the general-C extraction is not supported");
  }
  const int r = n - p;
  const Domain dom = ss.domain;

  Eigen::MatrixXd T(n, n);
  T.topRows(p) = ss.C;
  T.bottomRows(r) = E.transpose();
  const Eigen::MatrixXd Tinv = T.inverse();
  const Eigen::MatrixXd Ah = T * ss.A * Tinv;
  const Eigen::MatrixXd Bh = T * ss.B;
  const Eigen::MatrixXd Kh = ss.K.size() > 0 ? Eigen::MatrixXd(T * ss.K)
                                             : Eigen::MatrixXd::Zero(n, p);

  const Eigen::MatrixXd A11 = Ah.topLeftCorner(p, p);
  const Eigen::MatrixXd A12 = Ah.topRightCorner(p, r);
  const Eigen::MatrixXd A21 = Ah.bottomLeftCorner(r, p);
  const Eigen::MatrixXd A22 = Ah.bottomRightCorner(r, r);
  const Eigen::MatrixXd B1 = Bh.topRows(p);
  const Eigen::MatrixXd B2 = Bh.bottomRows(r);
  const Eigen::MatrixXd K1 = Kh.topRows(p);
  const Eigen::MatrixXd K2 = Kh.bottomRows(r);

  // d(q) = det(qI - A22); numerator matrices over d for the eliminated block
  std::vector<double> d{1.0};
  std::vector<Eigen::MatrixXd> Wc, Vc, Lc;  // coefficient matrices, ascending in q
  if (r > 0) {
    const CharAdj ca = faddeev_leverrier(A22);
    d = ca.charpoly;
    Wc.assign(r, Eigen::MatrixXd());
    Vc.assign(r, Eigen::MatrixXd());
    Lc.assign(r, Eigen::MatrixXd());
    for (int k = 0; k < r; ++k) {
      // adj index k carries lambda^(r-1-k)
      Wc[r - 1 - k] = A12 * ca.adj[k] * A21;
      Vc[r - 1 - k] = A12 * ca.adj[k] * B2;
      Lc[r - 1 - k] = A12 * ca.adj[k] * K2;
    }
  }

  auto numerator = [&](const Eigen::MatrixXd& head, const std::vector<Eigen::MatrixXd>& tail,
                       int i, int j) {
    // head_ij * d(q) + sum_k tail[k]_ij q^k, ascending coefficients
    std::vector<double> c(d.size() + 1, 0.0);
    for (size_t k = 0; k < d.size(); ++k) c[k] += head(i, j) * d[k];
    for (size_t k = 0; k < tail.size(); ++k) c[k] += tail[k](i, j);
    return c;
  };

  DsfModel dsf;
  dsf.p = p;
  dsf.m = m;
  dsf.domain = dom;
  dsf.Q.assign(p * p, RationalTransferFunction::constant(0.0, dom));
  dsf.P.assign(p * m, RationalTransferFunction::constant(0.0, dom));
  dsf.H.assign(p * p, RationalTransferFunction::constant(0.0, dom));

  std::vector<std::vector<double>> rowden(p);
  for (int i = 0; i < p; ++i) {
    // D_i(q) = q d(q) - Wn_ii(q)
    const std::vector<double> wii = numerator(A11, Wc, i, i);
    std::vector<double> Di(d.size() + 1, 0.0);
    for (size_t k = 0; k < d.size(); ++k) Di[k + 1] += d[k];
    for (size_t k = 0; k < wii.size(); ++k) Di[k] -= wii[k];
    rowden[i] = std::move(Di);
  }

  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      dsf.Q[i * p + j] = make_rtf_ascending(numerator(A11, Wc, i, j), rowden[i], dom);
    }
    for (int k = 0; k < m; ++k)
      dsf.P[i * m + k] = make_rtf_ascending(numerator(B1, Vc, i, k), rowden[i], dom);
    for (int j = 0; j < p; ++j)
      dsf.H[i * p + j] = make_rtf_ascending(numerator(K1, Lc, i, j), rowden[i], dom);
  }

  // P <- Phat + (I - Q) D,  H <- Hhat + (I - Q)
  if (ss.D.size() > 0 && ss.D.cwiseAbs().maxCoeff() > 0.0) {
    std::vector<RationalTransferFunction> Pnew(p * m);
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < m; ++k) {
        RationalTransferFunction acc = dsf.P[i * m + k] +
            RationalTransferFunction::constant(ss.D(i, k), dom);
        for (int j = 0; j < p; ++j)
          if (j != i && ss.D(j, k) != 0.0) acc = acc - dsf.Q[i * p + j] * ss.D(j, k);
        Pnew[i * m + k] = acc;
      }
    dsf.P = std::move(Pnew);
  }
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      if (i == j)
        dsf.H[i * p + j] = dsf.H[i * p + j] + RationalTransferFunction::constant(1.0, dom);
      else
        dsf.H[i * p + j] = dsf.H[i * p + j] - dsf.Q[i * p + j];
    }
  return dsf;
}

DsfModel arx_to_dsf(const ArxNetworkModel& arx) {
  arx.validate();
  for (int i = 0; i < arx.p; ++i)
    if (arx.A[i].is_zero()) throw std::invalid_argument("arx_to_dsf: A_i is zero");
  DsfModel dsf;
  dsf.p = arx.p;
  dsf.m = arx.m;
  dsf.domain = Domain::Discrete;
  dsf.Q.assign(arx.p * arx.p, RationalTransferFunction::constant(0.0));
  dsf.P.assign(arx.p * arx.m, RationalTransferFunction::constant(0.0));
  dsf.H.assign(arx.p * arx.p, RationalTransferFunction::constant(0.0));
  for (int i = 0; i < arx.p; ++i) {
    for (int j = 0; j < arx.p; ++j)
      if (i != j) dsf.Q[i * arx.p + j] = {arx.By[i][j], arx.A[i]};
    for (int k = 0; k < arx.m; ++k) dsf.P[i * arx.m + k] = {arx.Bu[i][k], arx.A[i]};
    const Polynomial ci = arx.is_armax() ? arx.C[i] : Polynomial::constant(1.0);
    dsf.H[i * arx.p + i] = {ci, arx.A[i]};
  }
  return dsf;
}

namespace {
bool poly_nonzero(const Polynomial& q, double tol) { return q.max_abs_coeff() > tol; }
}

BooleanNetwork boolean_structure(const DsfModel& dsf, double tol) {
  double scale = 0.0;
  for (const auto& g : dsf.Q) scale = std::max(scale, g.num().max_abs_coeff());
  for (const auto& g : dsf.P) scale = std::max(scale, g.num().max_abs_coeff());
  if (tol < 0.0) tol = 1e-8 * std::max(scale, 1.0);
  BooleanNetwork net;
  net.p = dsf.p;
  net.m = dsf.m;
  for (int i = 0; i < dsf.p; ++i) {
    for (int j = 0; j < dsf.p; ++j)
      if (i != j && poly_nonzero(dsf.q(i, j).num(), tol)) net.yy.insert({i, j});
    for (int k = 0; k < dsf.m; ++k)
      if (poly_nonzero(dsf.pf(i, k).num(), tol)) net.uy.insert({i, k});
  }
  return net;
}

BooleanNetwork boolean_structure(const ArxNetworkModel& arx, double tol) {
  if (tol < 0.0) tol = 1e-8 * std::max(arx.max_abs_coeff(), 1.0);
  BooleanNetwork net;
  net.p = arx.p;
  net.m = arx.m;
  for (int i = 0; i < arx.p; ++i) {
    for (int j = 0; j < arx.p; ++j)
      if (i != j && poly_nonzero(arx.By[i][j], tol)) net.yy.insert({i, j});
    for (int k = 0; k < arx.m; ++k)
      if (poly_nonzero(arx.Bu[i][k], tol)) net.uy.insert({i, k});
  }
  return net;
}

BooleanNetwork dsf_structure_from_state_space(const StateSpaceModel& ss, double tol) {
  const int n = ss.n(), p = ss.p(), m = ss.m();
  const int r = n - p;
  const Eigen::MatrixXd E = default_null_basis(ss.C);
  Eigen::MatrixXd T(n, n);
  T.topRows(p) = ss.C;
  T.bottomRows(r) = E.transpose();
  const Eigen::MatrixXd Tinv = T.inverse();
  const Eigen::MatrixXd Ah = T * ss.A * Tinv;
  const Eigen::MatrixXd Bh = T * ss.B;
  const Eigen::MatrixXd A11 = Ah.topLeftCorner(p, p), A12 = Ah.topRightCorner(p, r);
  const Eigen::MatrixXd A21 = Ah.bottomLeftCorner(r, p), A22 = Ah.bottomRightCorner(r, r);
  const Eigen::MatrixXd B1 = Bh.topRows(p), B2 = Bh.bottomRows(r);

  Eigen::MatrixXd qmax = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd pmax = Eigen::MatrixXd::Zero(p, m);
  const double phases[] = {0.37, 1.11, 2.53};
  for (double ph : phases) {
    const std::complex<double> z = ss.domain == Domain::Discrete
                                       ? std::polar(1.3, ph)
                                       : std::complex<double>(0.11, 0.9 * ph + 0.2);
    Eigen::MatrixXcd W = A11.cast<std::complex<double>>();
    Eigen::MatrixXcd V = B1.cast<std::complex<double>>();
    if (r > 0) {
      const Eigen::MatrixXcd inner =
          (z * Eigen::MatrixXcd::Identity(r, r) - A22.cast<std::complex<double>>()).inverse();
      W += A12.cast<std::complex<double>>() * inner * A21.cast<std::complex<double>>();
      V += A12.cast<std::complex<double>>() * inner * B2.cast<std::complex<double>>();
    }
    // division by the diagonal row factor does not change the pattern
    qmax = qmax.cwiseMax(W.cwiseAbs());
    pmax = pmax.cwiseMax(V.cwiseAbs());
  }
  const double scale = std::max({qmax.maxCoeff(), pmax.size() > 0 ? pmax.maxCoeff() : 0.0, 1.0});
  BooleanNetwork net;
  net.p = p;
  net.m = m;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j)
      if (i != j && qmax(i, j) > tol * scale) net.yy.insert({i, j});
    for (int k = 0; k < m; ++k)
      if (pmax(i, k) > tol * scale) net.uy.insert({i, k});
  }
  return net;
}

namespace {

// det(I - Q) after clearing denominators row by row. Extra factors are the
// row denominators themselves, which must already be stable when this is
// called as part of dsf_is_stable.
Polynomial cleared_feedback_det(const std::vector<RationalTransferFunction>& Q, int p, Domain dom) {
  std::vector<Polynomial> entries(p * p, Polynomial::zero(dom));
  for (int i = 0; i < p; ++i) {
    // common denominator of the row: product of the distinct denominators
    // only, so a shared denominator is cleared once instead of being raised
    // to the entry count (repeated roots degrade the determinant badly)
    std::vector<Polynomial> distinct;
    for (int j = 0; j < p; ++j) {
      if (Q[i * p + j].is_zero()) continue;
      const Polynomial& d = Q[i * p + j].den();
      bool seen = false;
      for (const Polynomial& u : distinct) seen = seen || u == d;
      if (!seen) distinct.push_back(d);
    }
    Polynomial rowden = Polynomial::constant(1.0, dom);
    for (const Polynomial& u : distinct) rowden = rowden * u;
    for (int j = 0; j < p; ++j) {
      Polynomial e = (i == j) ? rowden : Polynomial::zero(dom);
      if (!Q[i * p + j].is_zero()) {
        Polynomial cof = Polynomial::constant(1.0, dom);
        for (const Polynomial& u : distinct)
          if (!(u == Q[i * p + j].den())) cof = cof * u;
        e = e - Q[i * p + j].num() * cof;
      }
      entries[i * p + j] = std::move(e);
    }
  }
  return poly_matrix_det(entries, p);
}

}  // namespace

bool dsf_is_stable(const DsfModel& dsf) {
  for (const auto& g : dsf.Q)
    if (!g.is_zero() && !is_stable(g)) return false;
  for (const auto& g : dsf.P)
    if (!g.is_zero() && !is_stable(g)) return false;
  for (const auto& g : dsf.H)
    if (!g.is_zero() && !is_stable(g)) return false;
  return poly_is_stable(cleared_feedback_det(dsf.Q, dsf.p, dsf.domain));
}

bool arx_is_stable(const ArxNetworkModel& arx) {
  for (const auto& a : arx.A)
    if (!poly_is_stable(a)) return false;
  // det(diag(A) - By): rows already polynomial, no clearing needed
  std::vector<Polynomial> entries(arx.p * arx.p, Polynomial::zero());
  for (int i = 0; i < arx.p; ++i)
    for (int j = 0; j < arx.p; ++j)
      entries[i * arx.p + j] = (i == j) ? arx.A[i] : Polynomial::zero() - arx.By[i][j];
  return poly_is_stable(poly_matrix_det(entries, arx.p));
}

// --- JSON ---

namespace {
nlohmann::json poly_json(const Polynomial& q) { return q.coeffs(); }
Polynomial poly_from_json(const nlohmann::json& j, Domain dom = Domain::Discrete) {
  return Polynomial(j.get<std::vector<double>>(), dom);
}
nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int c = 0; c < cols; ++c) M(i, c) = j[i][c].get<double>();
  return M;
}
}  // namespace

nlohmann::json to_json(const ArxNetworkModel& model) {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["type"] = "arx";
  j["p"] = model.p;
  j["m"] = model.m;
  for (const auto& a : model.A) j["A"].push_back(poly_json(a));
  for (const auto& row : model.By) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& b : row) r.push_back(poly_json(b));
    j["By"].push_back(r);
  }
  j["Bu"] = nlohmann::json::array();
  for (const auto& row : model.Bu) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& b : row) r.push_back(poly_json(b));
    j["Bu"].push_back(r);
  }
  if (model.is_armax())
    for (const auto& c : model.C) j["C"].push_back(poly_json(c));
  return j;
}

ArxNetworkModel arx_from_json(const nlohmann::json& j) {
  if (j.value("type", "") != "arx") throw std::invalid_argument("arx_from_json: type is not 'arx'");
  ArxNetworkModel model;
  model.p = j.at("p").get<int>();
  model.m = j.at("m").get<int>();
  for (const auto& a : j.at("A")) model.A.push_back(poly_from_json(a));
  for (const auto& row : j.at("By")) {
    std::vector<Polynomial> r;
    for (const auto& b : row) r.push_back(poly_from_json(b));
    model.By.push_back(std::move(r));
  }
  for (const auto& row : j.at("Bu")) {
    std::vector<Polynomial> r;
    for (const auto& b : row) r.push_back(poly_from_json(b));
    model.Bu.push_back(std::move(r));
  }
  if (j.contains("C"))
    for (const auto& c : j.at("C")) model.C.push_back(poly_from_json(c));
  model.validate();
  return model;
}

nlohmann::json to_json(const BooleanNetwork& net) {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["type"] = "boolean";
  j["p"] = net.p;
  j["m"] = net.m;
  j["yy"] = nlohmann::json::array();
  for (const auto& [i, k] : net.yy) j["yy"].push_back({i, k});
  j["uy"] = nlohmann::json::array();
  for (const auto& [i, k] : net.uy) j["uy"].push_back({i, k});
  return j;
}

BooleanNetwork boolean_from_json(const nlohmann::json& j) {
  if (j.value("type", "") != "boolean")
    throw std::invalid_argument("boolean_from_json: type is not 'boolean'");
  BooleanNetwork net;
  net.p = j.at("p").get<int>();
  net.m = j.at("m").get<int>();
  for (const auto& a : j.at("yy")) net.yy.insert({a[0].get<int>(), a[1].get<int>()});
  for (const auto& a : j.at("uy")) net.uy.insert({a[0].get<int>(), a[1].get<int>()});
  return net;
}

nlohmann::json to_json(const StateSpaceModel& ss) {
  nlohmann::json j;
  j["schema"] = "dynet/v1";
  j["type"] = "ss";
  j["p"] = ss.p();
  j["m"] = ss.m();
  j["domain"] = ss.domain == Domain::Discrete ? "discrete" : "continuous";
  j["A"] = matrix_json(ss.A);
  j["B"] = matrix_json(ss.B);
  j["C"] = matrix_json(ss.C);
  j["D"] = matrix_json(ss.D);
  j["K"] = matrix_json(ss.K);
  j["R"] = matrix_json(ss.R);
  return j;
}

StateSpaceModel state_space_from_json(const nlohmann::json& j) {
  if (j.value("type", "") != "ss") throw std::invalid_argument("state_space_from_json: type is not 'ss'");
  StateSpaceModel ss;
  ss.A = matrix_from_json(j.at("A"));
  ss.B = matrix_from_json(j.at("B"));
  ss.C = matrix_from_json(j.at("C"));
  ss.D = matrix_from_json(j.at("D"));
  ss.K = matrix_from_json(j.at("K"));
  ss.R = matrix_from_json(j.at("R"));
  ss.domain = j.value("domain", "discrete") == "continuous" ? Domain::Continuous : Domain::Discrete;
  return ss;
}

}  // namespace dynet
