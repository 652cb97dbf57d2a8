#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "carleman/basis.hpp"
#include "carleman/linalg.hpp"

namespace carleman {

inline double ipow(double base, unsigned exp) {
  double result = 1.0;
  while (exp) {
    if (exp & 1u) result *= base;
    base *= base;
    exp >>= 1u;
  }
  return result;
}

// x^alpha
inline double monomial(const ExponentVector& alpha, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j)
    if (alpha[j]) v *= ipow(x[j], alpha[j]);
  return v;
}

// Stacks x^beta over every member of the basis.
inline Vector monomial_values(const MonomialBasis& basis, std::span<const double> x) {
  if (x.size() != basis.dimension()) throw DimensionMismatch("monomial_values: state size mismatch");
  Vector y(basis.size());
  for (std::size_t c = 0; c < basis.size(); ++c) y[c] = monomial(basis[c], x);
  return y;
}

struct PolynomialTerm {
  std::size_t row;
  ExponentVector exponent;
  double coeff;
};

// Right-hand side xdot = A_XY y(x), one row per state equation and one
// column per nonconstant monomial of degree <= P.
class PolynomialOperator {
 public:
  PolynomialOperator() = default;

  static PolynomialOperator from_terms(std::size_t n, unsigned degree,
                                       const std::vector<PolynomialTerm>& terms) {
    PolynomialOperator op;
    op.basis_ = generate_basis(n, degree);
    op.coeffs_ = Matrix(n, op.basis_.size());
    for (const auto& t : terms) {
      if (t.row >= n)
        throw DimensionMismatch("from_terms: row " + std::to_string(t.row) + " out of range");
      if (t.exponent.size() != n)
        throw DimensionMismatch("from_terms: exponent length " + std::to_string(t.exponent.size()) +
                                " != n");
      if (t.exponent.degree() < 1 || t.exponent.degree() > degree)
        throw DegreeOutOfRange("from_terms: monomial " + t.exponent.to_string() +
                               " has degree outside 1.." + std::to_string(degree));
      op.coeffs_(t.row, *op.basis_.find(t.exponent)) += t.coeff;
    }
    return op;
  }

  std::size_t dimension() const { return basis_.dimension(); }
  unsigned degree() const { return basis_.max_degree(); }
  const MonomialBasis& basis() const { return basis_; }
  const Matrix& coeffs() const { return coeffs_; }

  Vector eval_rhs(std::span<const double> x) const {
    check_size(x);
    return coeffs_ * monomial_values(basis_, x);
  }

  // J(i, j) = sum_beta A[i, beta] * beta_j * x^(beta - e_j)
  Matrix jacobian(std::span<const double> x) const {
    check_size(x);
    const std::size_t n = dimension();
    Matrix jac(n, n);
    for (std::size_t c = 0; c < basis_.size(); ++c) {
      const ExponentVector& beta = basis_[c];
      for (std::size_t j = 0; j < n; ++j) {
        if (beta[j] == 0) continue;
        const double d = beta[j] * monomial(beta.lowered(j), x);
        for (std::size_t i = 0; i < n; ++i) {
          const double a = coeffs_(i, c);
          if (a != 0.0) jac(i, j) += a * d;
        }
      }
    }
    return jac;
  }

  std::vector<PolynomialTerm> terms() const {
    std::vector<PolynomialTerm> out;
    for (std::size_t i = 0; i < coeffs_.rows(); ++i)
      for (std::size_t c = 0; c < coeffs_.cols(); ++c)
        if (coeffs_(i, c) != 0.0) out.push_back({i, basis_[c], coeffs_(i, c)});
    return out;
  }

 private:
  void check_size(std::span<const double> x) const {
    if (x.size() != dimension())
      throw DimensionMismatch("state has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(dimension()));
  }

  MonomialBasis basis_;
  Matrix coeffs_;
};

}  // namespace carleman
