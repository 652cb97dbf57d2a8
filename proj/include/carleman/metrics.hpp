#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carleman/assembly.hpp"
#include "carleman/integrate.hpp"
#include "carleman/linalg.hpp"
#include "carleman/operator.hpp"

namespace carleman {

struct ErrorReport {
  double dt = 0.0;
  std::size_t n_steps = 0;
  double max_error = 0.0;   // max over samples of the Euclidean state error
  double frob_error = 0.0;  // Frobenius norm of the full (sample x state) error array
  Vector per_state_max;
};

inline ErrorReport max_error(const Trajectory& approx, const Trajectory& ref) {
  if (approx.size() != ref.size())
    throw GridMismatch("max_error: trajectories have " + std::to_string(approx.size()) + " and " +
                       std::to_string(ref.size()) + " samples");
  for (std::size_t k = 0; k < approx.size(); ++k)
    if (std::abs(approx.times[k] - ref.times[k]) > 1e-12)
      throw GridMismatch("max_error: time grids differ at sample " + std::to_string(k));
  if (approx.dimension() != ref.dimension())
    throw DimensionMismatch("max_error: state dimensions differ");

  ErrorReport rep;
  rep.n_steps = approx.size() ? approx.size() - 1 : 0;
  rep.dt = rep.n_steps ? (approx.times.back() - approx.times.front()) / static_cast<double>(rep.n_steps)
                       : 0.0;
  rep.per_state_max.assign(approx.dimension(), 0.0);
  double frob_sq = 0.0;
  for (std::size_t k = 0; k < approx.size(); ++k) {
    double sq = 0.0;
    for (std::size_t j = 0; j < approx.dimension(); ++j) {
      const double e = approx.states[k][j] - ref.states[k][j];
      sq += e * e;
      rep.per_state_max[j] = std::max(rep.per_state_max[j], std::abs(e));
    }
    frob_sq += sq;
    rep.max_error = std::max(rep.max_error, std::sqrt(sq));
  }
  rep.frob_error = std::sqrt(frob_sq);
  return rep;
}

// Largest tested step with E(dt) <= tol. Restricted to the tested grid; no
// interpolation because E need not be monotone in dt.
inline std::optional<double> dt_max(std::span<const ErrorReport> reports, double tol) {
  std::optional<double> best;
  for (const auto& r : reports)
    if (r.max_error <= tol && (!best || r.dt > *best)) best = r.dt;
  return best;
}

// R(e) = dt_max(lifted, e) / dt_max(jacobian, e)
inline std::optional<double> gain(std::span<const ErrorReport> lifted,
                                  std::span<const ErrorReport> jacobian, double tol) {
  const auto num = dt_max(lifted, tol);
  const auto den = dt_max(jacobian, tol);
  if (!num || !den) return std::nullopt;
  return *num / *den;
}

struct ResolventError {
  Vector delta;          // (I - dt A)^{-1} dt r
  double amplification;  // ||(I - dt A)^{-1}||_inf
};

inline ResolventError resolvent_step_error(const CsrMatrix& a_zz, double dt,
                                           std::span<const double> residual) {
  const std::size_t nz = a_zz.rows();
  if (residual.size() != nz) throw DimensionMismatch("resolvent_step_error: residual size mismatch");
  Matrix m = a_zz.to_dense();
  for (std::size_t r = 0; r < nz; ++r) {
    for (double& v : m.row(r)) v *= -dt;
    m(r, r) += 1.0;
  }
  const LuDecomposition lu(std::move(m));

  Vector scaled(residual.begin(), residual.end());
  for (double& v : scaled) v *= dt;

  ResolventError out{lu.solve(scaled), 0.0};
  // row sums of |inverse|, accumulated one column at a time
  Vector row_sums(nz, 0.0), unit(nz, 0.0);
  for (std::size_t c = 0; c < nz; ++c) {
    unit[c] = 1.0;
    const Vector col = lu.solve(unit);
    unit[c] = 0.0;
    for (std::size_t r = 0; r < nz; ++r) row_sums[r] += std::abs(col[r]);
  }
  out.amplification = norm_inf(row_sums);
  return out;
}

// Pointwise truncation residual at a probe state: the exact chain-rule
// derivative of the deviation monomials minus A_ZZ z + b_Z.
inline Vector closure_residual(const PolynomialOperator& op, const LiftedAffineSystem& lifted,
                               const MonomialBasis& basis_z, std::span<const double> probe) {
  const std::size_t n = op.dimension();
  if (probe.size() != n || lifted.center.size() != n || basis_z.dimension() != n)
    throw DimensionMismatch("closure_residual: probe, center and basis dimensions must agree");
  if (lifted.a_zz.rows() != basis_z.size())
    throw DimensionMismatch("closure_residual: lifted system does not match the basis");

  Vector d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = probe[j] - lifted.center[j];
  const Vector f = op.eval_rhs(probe);
  const Vector z = monomial_values(basis_z, d);
  Vector out = lifted.a_zz * z;

  for (std::size_t row = 0; row < basis_z.size(); ++row) {
    const ExponentVector& alpha = basis_z[row];
    double exact = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (alpha[i]) exact += alpha[i] * monomial(alpha.lowered(i), d) * f[i];
    out[row] = exact - (out[row] + lifted.b_z[row]);
  }
  return out;
}

// Least-squares slope of log(error) against log(dt).
inline std::optional<double> loglog_slope(std::span<const double> dts, std::span<const double> errors) {
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < dts.size() && k < errors.size(); ++k) {
    if (dts[k] > 0.0 && errors[k] > 0.0 && std::isfinite(errors[k])) {
      xs.push_back(std::log(dts[k]));
      ys.push_back(std::log(errors[k]));
    }
  }
  if (xs.size() < 2) return std::nullopt;
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) sx += xs[k], sy += ys[k];
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

}  // namespace carleman
