#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "carleman/basis.hpp"
#include "carleman/linalg.hpp"
#include "carleman/operator.hpp"

namespace carleman {

enum class ClosureMode { Drop, Fold };

inline const char* to_string(ClosureMode mode) { return mode == ClosureMode::Drop ? "drop" : "fold"; }

inline ClosureMode parse_closure_mode(const std::string& s) {
  if (s == "drop") return ClosureMode::Drop;
  if (s == "fold") return ClosureMode::Fold;
  throw UsageError("unknown closure mode '" + s + "' (expected drop or fold)");
}

// Pascal triangle C(m, k) for 0 <= k <= m <= max_n.
class BinomialTable {
 public:
  explicit BinomialTable(unsigned max_n) : width_(max_n + 1), table_(width_ * width_, 0.0) {
    for (unsigned m = 0; m <= max_n; ++m) {
      at(m, 0) = 1.0;
      for (unsigned k = 1; k <= m; ++k) at(m, k) = at(m - 1, k - 1) + (k < m ? at(m - 1, k) : 0.0);
    }
  }

  double operator()(unsigned m, unsigned k) const { return table_[m * width_ + k]; }

 private:
  double& at(unsigned m, unsigned k) { return table_[m * width_ + k]; }

  std::size_t width_;
  std::vector<double> table_;
};

// Polynomial re-expanded about a center: xdot_i = b_y(i) + sum_r a_shift[i, r] (x - center)^r.
struct ShiftedOperator {
  Matrix a_shift;
  Vector b_y;
  Vector center;
  unsigned degree = 0;
  // generated (row, alpha, r) terms, including the |r| = 0 terms feeding b_y
  std::size_t t_shift = 0;

  std::size_t dimension() const { return b_y.size(); }
};

// Expands (d + c)^alpha = sum_{r <= alpha} prod_j C(alpha_j, r_j) c^(alpha - r) d^r
// term by term over the nonzero coefficients; no dense shift matrix is formed.
inline ShiftedOperator shift_operator(const PolynomialOperator& op, std::span<const double> center) {
  const std::size_t n = op.dimension();
  if (center.size() != n)
    throw DimensionMismatch("shift_operator: center has length " + std::to_string(center.size()) +
                            ", expected " + std::to_string(n));
  const MonomialBasis& basis = op.basis();
  const Matrix& a = op.coeffs();
  const BinomialTable binom(op.degree());

  ShiftedOperator out;
  out.a_shift = Matrix(n, basis.size());
  out.b_y = Vector(n, 0.0);
  out.center.assign(center.begin(), center.end());
  out.degree = op.degree();

  std::vector<std::size_t> rows;
  std::vector<unsigned> r(n);
  for (std::size_t col = 0; col < basis.size(); ++col) {
    rows.clear();
    for (std::size_t i = 0; i < n; ++i)
      if (a(i, col) != 0.0) rows.push_back(i);
    if (rows.empty()) continue;

    const ExponentVector& alpha = basis[col];
    std::fill(r.begin(), r.end(), 0u);
    while (true) {
      double weight = 1.0;
      unsigned degree = 0;
      for (std::size_t j = 0; j < n; ++j) {
        weight *= binom(alpha[j], r[j]) * ipow(center[j], alpha[j] - r[j]);
        degree += r[j];
      }
      if (degree == 0) {
        for (std::size_t i : rows) out.b_y[i] += a(i, col) * weight;
      } else {
        const std::size_t target = *basis.find(ExponentVector(r));
        for (std::size_t i : rows) out.a_shift(i, target) += a(i, col) * weight;
      }
      out.t_shift += rows.size();

      // odometer over 0 <= r <= alpha
      std::size_t j = 0;
      while (j < n && r[j] == alpha[j]) r[j++] = 0;
      if (j == n) break;
      ++r[j];
    }
  }
  return out;
}

inline constexpr std::size_t kDropped = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kConstantSlot = std::numeric_limits<std::size_t>::max() - 1;

// One lift contribution alpha_i * a_shift[i, beta] x^(alpha - e_i + beta).
struct LiftTuple {
  std::size_t row;       // alpha's column in Z
  std::size_t state;     // i
  std::size_t beta_col;  // beta's column in Y
  unsigned multiplier;   // alpha_i
  PackedKey target_key;  // pack_key(alpha - e_i + beta)
  std::size_t target;    // column in Z, or kDropped
};

// One b_y-driven contribution alpha_i * b_y(i) x^(alpha - e_i).
struct ConstantTuple {
  std::size_t row;
  std::size_t state;
  unsigned multiplier;
  std::size_t target;  // column of alpha - e_i in Z, or kConstantSlot when alpha = e_i
};

// Integer structure of the lift for fixed (n, P, Q). Holds no coefficients,
// so one instance serves every center along a trajectory.
class LiftStructure {
 public:
  std::size_t dimension() const { return basis_z_.dimension(); }
  unsigned lift_degree() const { return basis_z_.max_degree(); }
  unsigned rhs_degree() const { return basis_y_.max_degree(); }
  const MonomialBasis& basis_y() const { return basis_y_; }
  const MonomialBasis& basis_z() const { return basis_z_; }
  const std::vector<LiftTuple>& lift_tuples() const { return lift_tuples_; }
  const std::vector<ConstantTuple>& constant_tuples() const { return constant_tuples_; }
  std::size_t dropped() const { return dropped_; }

  friend LiftStructure build_lift_structure(std::size_t n, unsigned P, unsigned Q);

 private:
  MonomialBasis basis_y_;
  MonomialBasis basis_z_;
  std::vector<LiftTuple> lift_tuples_;
  std::vector<ConstantTuple> constant_tuples_;
  std::size_t dropped_ = 0;
};

inline LiftStructure build_lift_structure(std::size_t n, unsigned P, unsigned Q) {
  if (P < 1 || P > Q)
    throw InvalidDimension("build_lift_structure: need 1 <= P <= Q (got P=" + std::to_string(P) +
                           ", Q=" + std::to_string(Q) + ")");
  LiftStructure s;
  s.basis_z_ = generate_basis(n, Q);
  s.basis_y_ = generate_basis(n, P);
  const unsigned bits = s.basis_z_.bits();

  // Keys of alpha - e_i + beta are formed by adding packed keys: every
  // component stays below 2Q + 1 <= 2^b, so no carry crosses a field.
  std::vector<PackedKey> beta_keys;
  beta_keys.reserve(s.basis_y_.size());
  for (const auto& beta : s.basis_y_.members()) beta_keys.push_back(pack_key(beta, bits));

  for (std::size_t row = 0; row < s.basis_z_.size(); ++row) {
    const ExponentVector& alpha = s.basis_z_[row];
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      const ExponentVector lowered = alpha.lowered(i);
      const PackedKey lowered_key = pack_key(lowered, bits);
      for (std::size_t b = 0; b < beta_keys.size(); ++b) {
        const PackedKey key = lowered_key + beta_keys[b];
        std::size_t target = kDropped;
        if (lowered.degree() + s.basis_y_[b].degree() <= Q) {
          if (auto col = s.basis_z_.find(key)) target = *col;
        }
        if (target == kDropped) ++s.dropped_;
        s.lift_tuples_.push_back({row, i, b, alpha[i], key, target});
      }
      const std::size_t ctarget =
          lowered.degree() == 0 ? kConstantSlot : *s.basis_z_.find(lowered_key);
      s.constant_tuples_.push_back({row, i, alpha[i], ctarget});
    }
  }
  return s;
}

struct AssemblyStats {
  std::size_t t_shift = 0;        // generated shift terms
  std::size_t t_lift = 0;         // generated lift contributions, dropped included
  std::size_t u_ours = 0;         // unique nonzero writes: A_ZZ entries plus b_Z slots
  std::size_t dropped = 0;        // truncated lift contributions
  std::size_t contributions = 0;  // nonzero values emitted before coalescing
};

// zdot = A_ZZ z + b_Z with z the deviation monomials about `center`.
struct LiftedAffineSystem {
  CsrMatrix a_zz;
  Vector b_z;
  Vector center;
  AssemblyStats stats;
};

namespace detail {

inline void check_compatible(const ShiftedOperator& shifted, std::size_t n, unsigned P, unsigned Q) {
  if (shifted.dimension() != n)
    throw DimensionMismatch("assembly: shifted operator has dimension " +
                            std::to_string(shifted.dimension()) + ", structure expects " +
                            std::to_string(n));
  if (shifted.degree != P)
    throw DimensionMismatch("assembly: shifted operator has degree " + std::to_string(shifted.degree) +
                            ", structure expects " + std::to_string(P));
  if (P > Q) throw InvalidDimension("assembly: need P <= Q");
}

}  // namespace detail

// Key-resolved triplet assembly. Targets come precomputed from the cached
// structure; duplicates are coalesced by a stable sort-and-sum.
inline LiftedAffineSystem assemble_lifted(const ShiftedOperator& shifted,
                                          const LiftStructure& structure,
                                          ClosureMode mode = ClosureMode::Drop) {
  const std::size_t n = structure.dimension();
  detail::check_compatible(shifted, n, structure.rhs_degree(), structure.lift_degree());
  const MonomialBasis& z = structure.basis_z();
  const std::size_t nz = z.size();

  LiftedAffineSystem out;
  out.center = shifted.center;
  out.b_z = Vector(nz, 0.0);
  std::vector<char> b_written(nz, 0);
  AssemblyStats& stats = out.stats;
  stats.t_shift = shifted.t_shift;
  stats.t_lift = structure.lift_tuples().size();
  stats.dropped = structure.dropped();

  std::vector<Triplet> triplets;
  triplets.reserve(stats.t_lift - stats.dropped + structure.constant_tuples().size());

  for (const LiftTuple& t : structure.lift_tuples()) {
    const double value = t.multiplier * shifted.a_shift(t.state, t.beta_col);
    if (value == 0.0) continue;
    if (t.target != kDropped) {
      triplets.push_back({t.row, t.target, value});
      ++stats.contributions;
    } else if (mode == ClosureMode::Fold) {
      const ExponentVector gamma = unpack_key(t.target_key, n, z.bits());
      out.b_z[t.row] += value * monomial(gamma, shifted.center);
      b_written[t.row] = 1;
      ++stats.contributions;
    }
  }
  for (const ConstantTuple& t : structure.constant_tuples()) {
    const double value = t.multiplier * shifted.b_y[t.state];
    if (value == 0.0) continue;
    if (t.target == kConstantSlot) {
      out.b_z[t.row] += value;
      b_written[t.row] = 1;
    } else {
      triplets.push_back({t.row, t.target, value});
    }
    ++stats.contributions;
  }

  out.a_zz = CsrMatrix::from_triplets(nz, nz, std::move(triplets));
  stats.u_ours = out.a_zz.nnz();
  for (char w : b_written) stats.u_ours += static_cast<std::size_t>(w);
  return out;
}

// Term-by-term expansion with linear search over Z; no key map and no cache.
// Serves as the reference the key-resolved assembly is checked against.
inline LiftedAffineSystem assemble_naive(const ShiftedOperator& shifted, unsigned P, unsigned Q,
                                         ClosureMode mode = ClosureMode::Drop) {
  const std::size_t n = shifted.dimension();
  detail::check_compatible(shifted, n, P, Q);
  const std::vector<ExponentVector> ys = generate_basis(n, P).members();
  const std::vector<ExponentVector> zs = generate_basis(n, Q).members();
  const std::size_t nz = zs.size();

  auto search = [&zs](const ExponentVector& gamma) -> std::size_t {
    for (std::size_t c = 0; c < zs.size(); ++c)
      if (zs[c] == gamma) return c;
    return kDropped;
  };

  Matrix dense(nz, nz);
  std::vector<char> written(nz * nz, 0);
  std::vector<char> b_written(nz, 0);
  LiftedAffineSystem out;
  out.center = shifted.center;
  out.b_z = Vector(nz, 0.0);
  AssemblyStats& stats = out.stats;
  stats.t_shift = shifted.t_shift;

  for (std::size_t row = 0; row < nz; ++row) {
    const ExponentVector& alpha = zs[row];
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      const ExponentVector lowered = alpha.lowered(i);
      for (std::size_t b = 0; b < ys.size(); ++b) {
        const ExponentVector gamma = lowered + ys[b];
        const std::size_t col = gamma.degree() <= Q ? search(gamma) : kDropped;
        ++stats.t_lift;
        if (col == kDropped) ++stats.dropped;
        const double value = alpha[i] * shifted.a_shift(i, b);
        if (value == 0.0) continue;
        if (col != kDropped) {
          dense(row, col) += value;
          written[row * nz + col] = 1;
          ++stats.contributions;
        } else if (mode == ClosureMode::Fold) {
          out.b_z[row] += value * monomial(gamma, shifted.center);
          b_written[row] = 1;
          ++stats.contributions;
        }
      }
      const double value = alpha[i] * shifted.b_y[i];
      if (value == 0.0) continue;
      if (lowered.degree() == 0) {
        out.b_z[row] += value;
        b_written[row] = 1;
      } else {
        const std::size_t col = search(lowered);
        dense(row, col) += value;
        written[row * nz + col] = 1;
      }
      ++stats.contributions;
    }
  }

  std::vector<Triplet> entries;
  for (std::size_t r = 0; r < nz; ++r)
    for (std::size_t c = 0; c < nz; ++c)
      if (written[r * nz + c]) entries.push_back({r, c, dense(r, c)});
  out.a_zz = CsrMatrix::from_triplets(nz, nz, std::move(entries));
  stats.u_ours = out.a_zz.nnz();
  for (char w : b_written) stats.u_ours += static_cast<std::size_t>(w);
  return out;
}

}  // namespace carleman
