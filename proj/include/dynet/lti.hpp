#ifndef DYNET_LTI_HPP
#define DYNET_LTI_HPP

#include <complex>
#include <stdexcept>
#include <vector>

namespace dynet {

/// Variable convention for polynomials and transfer functions.
/// Discrete polynomials are in the backward-shift variable q^-1,
/// continuous ones in the Laplace variable s. Coefficients are stored
/// constant-term first in both cases.
enum class Domain { Discrete, Continuous };

class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::vector<double> coeffs, Domain domain = Domain::Discrete)
      : coeffs_(std::move(coeffs)), domain_(domain) {
    trim();
  }
  static Polynomial constant(double c, Domain domain = Domain::Discrete) {
    return Polynomial({c}, domain);
  }
  static Polynomial zero(Domain domain = Domain::Discrete) {
    return Polynomial({}, domain);
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  Domain domain() const { return domain_; }

  bool is_zero() const { return coeffs_.empty(); }
  /// Degree after trailing-zero trimming; -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(coeffs_.size())) ? coeffs_[k] : 0.0;
  }
  double max_abs_coeff() const;
  /// Monic in the paper's sense for A(q), C(q): constant term exactly 1.
  bool is_monic() const { return !coeffs_.empty() && coeffs_[0] == 1.0; }

  /// Evaluates at a point of the shift (or Laplace) variable. Discrete
  /// polynomials are evaluated as sum c_k z^-k, continuous as sum c_k s^k.
  std::complex<double> operator()(std::complex<double> z) const;

  /// Evaluation in plain ascending-coefficient form (Horner), ignoring the
  /// domain convention. Used for root finding and determinant interpolation.
  std::complex<double> eval_ascending(std::complex<double> x) const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  bool operator==(const Polynomial& o) const {
    return domain_ == o.domain_ && coeffs_ == o.coeffs_;
  }

 private:
  void trim();
  std::vector<double> coeffs_;
  Domain domain_ = Domain::Discrete;
};

/// Roots in the q (or s) variable. For a discrete polynomial
/// sum c_k q^-k the roots are those of the reversed polynomial in q,
/// e.g. 1 - 0.5 q^-1 has the single root q = 0.5.
std::vector<std::complex<double>> poly_roots(const Polynomial& p);

/// Roots of the plain ascending-coefficient polynomial (companion matrix).
std::vector<std::complex<double>> roots_ascending(const std::vector<double>& coeffs);

class RationalTransferFunction {
 public:
  RationalTransferFunction() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
  RationalTransferFunction(Polynomial num, Polynomial den);
  static RationalTransferFunction constant(double g, Domain domain = Domain::Discrete) {
    return {Polynomial::constant(g, domain), Polynomial::constant(1.0, domain)};
  }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  Domain domain() const { return num_.domain(); }
  bool is_zero() const { return num_.is_zero(); }

  bool proper() const { return num_.degree() <= den_.degree(); }
  bool strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }

  RationalTransferFunction operator+(const RationalTransferFunction& o) const;
  RationalTransferFunction operator-(const RationalTransferFunction& o) const;
  RationalTransferFunction operator*(const RationalTransferFunction& o) const;
  RationalTransferFunction operator*(double s) const;

 private:
  Polynomial num_, den_;
};

bool is_stable(const RationalTransferFunction& g);

/// Stability of a bare denominator-style polynomial: discrete requires all
/// q-roots strictly inside the unit circle, continuous all s-roots with
/// negative real part.
bool poly_is_stable(const Polynomial& p);

/// Pointwise evaluation num(z)/den(z); throws if a point hits a pole.
std::vector<std::complex<double>> frequency_response(
    const RationalTransferFunction& g, const std::vector<std::complex<double>>& points);

std::complex<double> evaluate(const RationalTransferFunction& g, std::complex<double> z);

/// Grid-plus-refinement estimate of the H-infinity norm of a stable g.
/// Lower estimate tightened by a golden-section pass around the grid
/// maximizer; grid of `grid_size` points on the unit circle (discrete) or a
/// log-spaced imaginary axis (continuous).
double hinf_norm(const RationalTransferFunction& g, int grid_size = 1024);

/// Determinant of a square matrix of polynomials (row-major, n x n), via
/// evaluation at roots of unity and inverse DFT. All entries must share one
/// domain; the result carries it too.
Polynomial poly_matrix_det(const std::vector<Polynomial>& entries, int n);

}  // namespace dynet

#endif  // DYNET_LTI_HPP
