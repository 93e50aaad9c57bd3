#include "dynet/lti.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace dynet {

namespace {
constexpr double kTrimRel = 1e-12;
}

void Polynomial::trim() {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  if (m == 0.0) {
    coeffs_.clear();
    return;
  }
  const double tol = kTrimRel * m;
  while (!coeffs_.empty() && std::abs(coeffs_.back()) < tol) coeffs_.pop_back();
}

double Polynomial::max_abs_coeff() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

std::complex<double> Polynomial::eval_ascending(std::complex<double> x) const {
  std::complex<double> acc(0.0, 0.0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> z) const {
  if (domain_ == Domain::Continuous) return eval_ascending(z);
  // sum c_k z^-k
  return eval_ascending(1.0 / z);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (size_t k = 0; k < o.coeffs_.size(); ++k) c[k] += o.coeffs_[k];
  return Polynomial(std::move(c), domain_);
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  std::vector<double> c(std::max(coeffs_.size(), o.coeffs_.size()), 0.0);
  for (size_t k = 0; k < coeffs_.size(); ++k) c[k] += coeffs_[k];
  for (size_t k = 0; k < o.coeffs_.size(); ++k) c[k] -= o.coeffs_[k];
  return Polynomial(std::move(c), domain_);
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (is_zero() || o.is_zero()) return Polynomial::zero(domain_);
  std::vector<double> c(coeffs_.size() + o.coeffs_.size() - 1, 0.0);
  for (size_t a = 0; a < coeffs_.size(); ++a)
    for (size_t b = 0; b < o.coeffs_.size(); ++b) c[a + b] += coeffs_[a] * o.coeffs_[b];
  return Polynomial(std::move(c), domain_);
}

Polynomial Polynomial::operator*(double s) const {
  std::vector<double> c = coeffs_;
  for (double& x : c) x *= s;
  return Polynomial(std::move(c), domain_);
}

std::vector<std::complex<double>> roots_ascending(const std::vector<double>& coeffs) {
  // strip trailing zeros (leading coefficients of the ascending form)
  std::vector<double> c = coeffs;
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  const int n = static_cast<int>(c.size()) - 1;
  if (n <= 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) companion(k, n - 1) = -c[k] / c[n];
  for (int k = 1; k < n; ++k) companion(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> roots(n);
  for (int k = 0; k < n; ++k) roots[k] = es.eigenvalues()[k];
  return roots;
}

std::vector<std::complex<double>> poly_roots(const Polynomial& p) {
  if (p.is_zero()) throw std::invalid_argument("poly_roots: zero polynomial has no defined roots");
  if (p.domain() == Domain::Continuous) return roots_ascending(p.coeffs());
  // p(q) = sum c_k q^-k = q^-n * sum c_k q^(n-k); roots in q are those of the
  // reversed coefficient polynomial.
  std::vector<double> rev(p.coeffs().rbegin(), p.coeffs().rend());
  return roots_ascending(rev);
}

RationalTransferFunction::RationalTransferFunction(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw std::invalid_argument("transfer function: denominator is identically zero");
  if (num_.domain() != den_.domain())
    throw std::invalid_argument("transfer function: num/den domain mismatch");
}

RationalTransferFunction RationalTransferFunction::operator+(const RationalTransferFunction& o) const {
  return {num_ * o.den_ + o.num_ * den_, den_ * o.den_};
}
RationalTransferFunction RationalTransferFunction::operator-(const RationalTransferFunction& o) const {
  return {num_ * o.den_ - o.num_ * den_, den_ * o.den_};
}
RationalTransferFunction RationalTransferFunction::operator*(const RationalTransferFunction& o) const {
  return {num_ * o.num_, den_ * o.den_};
}
RationalTransferFunction RationalTransferFunction::operator*(double s) const {
  return {num_ * s, den_};
}

bool poly_is_stable(const Polynomial& p) {
  if (p.degree() <= 0) return true;
  for (const auto& r : poly_roots(p)) {
    if (p.domain() == Domain::Discrete) {
      if (std::abs(r) >= 1.0) return false;
    } else {
      if (r.real() >= 0.0) return false;
    }
  }
  return true;
}

bool is_stable(const RationalTransferFunction& g) { return poly_is_stable(g.den()); }

std::complex<double> evaluate(const RationalTransferFunction& g, std::complex<double> z) {
  const std::complex<double> d = g.den()(z);
  const double scale = std::max(g.den().max_abs_coeff(), 1e-300);
  if (std::abs(d) < 1e-12 * scale)
    throw std::domain_error("frequency_response: evaluation at a pole near z = (" +
                            std::to_string(z.real()) + "," + std::to_string(z.imag()) + ")");
  return g.num()(z) / d;
}

std::vector<std::complex<double>> frequency_response(
    const RationalTransferFunction& g, const std::vector<std::complex<double>>& points) {
  std::vector<std::complex<double>> out;
  out.reserve(points.size());
  for (const auto& z : points) out.push_back(evaluate(g, z));
  return out;
}

namespace {

double gain_at(const RationalTransferFunction& g, double w) {
  std::complex<double> z;
  if (g.domain() == Domain::Discrete)
    z = std::polar(1.0, w);
  else
    z = std::complex<double>(0.0, w);
  return std::abs(evaluate(g, z));
}

// Golden-section search for the maximum of gain_at on [a, b].
double golden_max(const RationalTransferFunction& g, double a, double b) {
  constexpr double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = gain_at(g, x1), f2 = gain_at(g, x2);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * (1.0 + std::abs(b)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = gain_at(g, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = gain_at(g, x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

double hinf_norm(const RationalTransferFunction& g, int grid_size) {
  if (g.is_zero()) return 0.0;
  if (!is_stable(g)) throw std::domain_error("hinf_norm: transfer function is unstable");
  if (grid_size < 2) grid_size = 2;

  std::vector<double> grid(grid_size);
  if (g.domain() == Domain::Discrete) {
    for (int k = 0; k < grid_size; ++k)
      grid[k] = std::numbers::pi * static_cast<double>(k) / (grid_size - 1);
  } else {
    // log-spaced imaginary axis plus dc
    grid[0] = 0.0;
    const double lo = -4.0, hi = 4.0;
    for (int k = 1; k < grid_size; ++k)
      grid[k] = std::pow(10.0, lo + (hi - lo) * (k - 1) / (grid_size - 2));
  }
  double best = -1.0;
  int best_k = 0;
  for (int k = 0; k < grid_size; ++k) {
    const double v = gain_at(g, grid[k]);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double a = grid[std::max(0, best_k - 1)];
  const double b = grid[std::min(grid_size - 1, best_k + 1)];
  if (b > a) best = std::max(best, golden_max(g, a, b));
  return best;
}

Polynomial poly_matrix_det(const std::vector<Polynomial>& entries, int n) {
  if (static_cast<int>(entries.size()) != n * n)
    throw std::invalid_argument("poly_matrix_det: entry count mismatch");
  if (n == 0) return Polynomial::constant(1.0);
  const Domain dom = entries[0].domain();

  // degree bound: sum over rows of the max entry degree
  int dbound = 0;
  for (int i = 0; i < n; ++i) {
    int dmax = 0;
    for (int j = 0; j < n; ++j) dmax = std::max(dmax, std::max(0, entries[i * n + j].degree()));
    dbound += dmax;
  }
  int K = 1;
  while (K < dbound + 1) K <<= 1;

  std::vector<std::complex<double>> dets(K);
  Eigen::MatrixXcd M(n, n);
  for (int k = 0; k < K; ++k) {
    const std::complex<double> x = std::polar(1.0, 2.0 * std::numbers::pi * k / K);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = entries[i * n + j].eval_ascending(x);
    dets[k] = M.determinant();
  }
  // inverse DFT; K is small so the quadratic form is fine
  std::vector<double> coeffs(dbound + 1, 0.0);
  for (int c = 0; c <= dbound; ++c) {
    std::complex<double> acc(0.0, 0.0);
    for (int k = 0; k < K; ++k)
      acc += dets[k] * std::polar(1.0, -2.0 * std::numbers::pi * c * k / K);
    coeffs[c] = acc.real() / K;
  }
  return Polynomial(std::move(coeffs), dom);
}

}  // namespace dynet
