#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "carleman/errors.hpp"

namespace carleman {

using PackedKey = std::uint64_t;

// Multi-index naming the monomial x^alpha. The total degree is cached.
class ExponentVector {
 public:
  ExponentVector() = default;

  explicit ExponentVector(std::vector<unsigned> exponents)
      : exponents_(std::move(exponents)) {
    for (unsigned e : exponents_) degree_ += e;
  }

  ExponentVector(std::initializer_list<unsigned> exponents)
      : ExponentVector(std::vector<unsigned>(exponents)) {}

  static ExponentVector unit(std::size_t n, std::size_t i) {
    std::vector<unsigned> e(n, 0);
    e[i] = 1;
    return ExponentVector(std::move(e));
  }

  std::size_t size() const { return exponents_.size(); }
  unsigned degree() const { return degree_; }
  unsigned operator[](std::size_t j) const { return exponents_[j]; }
  const std::vector<unsigned>& values() const { return exponents_; }

  // alpha - e_i; requires alpha_i >= 1.
  ExponentVector lowered(std::size_t i) const {
    ExponentVector out = *this;
    --out.exponents_[i];
    --out.degree_;
    return out;
  }

  ExponentVector operator+(const ExponentVector& other) const {
    if (other.size() != size())
      throw DimensionMismatch("exponent vectors of different length");
    ExponentVector out = *this;
    for (std::size_t j = 0; j < size(); ++j) out.exponents_[j] += other.exponents_[j];
    out.degree_ += other.degree_;
    return out;
  }

  bool operator==(const ExponentVector& other) const {
    return exponents_ == other.exponents_;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
      if (j) s += ',';
      s += std::to_string(exponents_[j]);
    }
    return s + ")";
  }

 private:
  std::vector<unsigned> exponents_;
  unsigned degree_ = 0;
};

// Smallest b with 2^b >= 2Q + 1, so every lift target component (at most 2Q)
// fits in b bits.
inline unsigned bits_required(unsigned max_degree) {
  if (max_degree < 1) throw InvalidDimension("bits_required: degree must be >= 1");
  const std::uint64_t needed = 2ULL * max_degree + 1;
  unsigned b = 0;
  while (b < 64 && (1ULL << b) < needed) ++b;
  return b;
}

inline PackedKey pack_key(const ExponentVector& gamma, unsigned bits) {
  const std::size_t n = gamma.size();
  if (bits == 0 || n * bits > 64)
    throw PackingOverflow("pack_key: " + std::to_string(n) + " components x " +
                          std::to_string(bits) + " bits exceeds 64");
  PackedKey key = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::uint64_t e = gamma[j];
    if (bits < 64 && (e >> bits) != 0)
      throw PackingOverflow("pack_key: exponent " + std::to_string(e) +
                            " does not fit in " + std::to_string(bits) + " bits");
    key |= e << (j * bits);
  }
  return key;
}

inline ExponentVector unpack_key(PackedKey key, std::size_t n, unsigned bits) {
  if (bits == 0 || n * bits > 64) throw PackingOverflow("unpack_key: width exceeds 64");
  const std::uint64_t mask = bits == 64 ? ~0ULL : (1ULL << bits) - 1;
  std::vector<unsigned> e(n);
  for (std::size_t j = 0; j < n; ++j) e[j] = static_cast<unsigned>((key >> (j * bits)) & mask);
  return ExponentVector(std::move(e));
}

// Symmetry-reduced monomials of degrees 1..max_degree, ordered by ascending
// total degree and lexicographically (x_1 heaviest first) within a degree.
// The first n columns are therefore the unit vectors e_1..e_n.
class MonomialBasis {
 public:
  MonomialBasis() = default;

  std::size_t dimension() const { return n_; }
  unsigned max_degree() const { return max_degree_; }
  unsigned bits() const { return bits_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<ExponentVector>& members() const { return members_; }
  const ExponentVector& operator[](std::size_t col) const { return members_[col]; }

  std::optional<std::size_t> find(PackedKey key) const {
    auto it = key_map_.find(key);
    if (it == key_map_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find(const ExponentVector& alpha) const {
    if (alpha.size() != n_ || alpha.degree() < 1 || alpha.degree() > max_degree_)
      return std::nullopt;
    return find(pack_key(alpha, bits_));
  }

  // Column range [begin, end) holding the monomials of total degree k.
  std::pair<std::size_t, std::size_t> degree_block(unsigned k) const {
    return {degree_offsets_.at(k - 1), degree_offsets_.at(k)};
  }

  friend MonomialBasis generate_basis(std::size_t n, unsigned max_degree);

 private:
  std::size_t n_ = 0;
  unsigned max_degree_ = 0;
  unsigned bits_ = 0;
  std::vector<ExponentVector> members_;
  std::vector<std::size_t> degree_offsets_;
  std::unordered_map<PackedKey, std::size_t> key_map_;
};

// Combinations with repetition of variable indices i_1 <= ... <= i_k, in
// lexicographic order, converted to exponent vectors.
inline MonomialBasis generate_basis(std::size_t n, unsigned max_degree) {
  if (n < 1 || max_degree < 1)
    throw InvalidDimension("generate_basis: need n >= 1 and max_degree >= 1");
  const unsigned bits = bits_required(max_degree);
  if (n * bits > 64)
    throw PackingOverflow("generate_basis: n*b = " + std::to_string(n) + "*" +
                          std::to_string(bits) + " exceeds 64");

  MonomialBasis basis;
  basis.n_ = n;
  basis.max_degree_ = max_degree;
  basis.bits_ = bits;
  basis.degree_offsets_.push_back(0);

  for (unsigned k = 1; k <= max_degree; ++k) {
    std::vector<std::size_t> idx(k, 0);
    while (true) {
      std::vector<unsigned> e(n, 0);
      for (std::size_t v : idx) ++e[v];
      basis.members_.emplace_back(std::move(e));

      // next non-decreasing index tuple
      std::size_t pos = k;
      while (pos > 0 && idx[pos - 1] == n - 1) --pos;
      if (pos == 0) break;
      const std::size_t next = idx[pos - 1] + 1;
      for (std::size_t p = pos - 1; p < k; ++p) idx[p] = next;
    }
    basis.degree_offsets_.push_back(basis.members_.size());
  }

  basis.key_map_.reserve(basis.members_.size());
  for (std::size_t col = 0; col < basis.members_.size(); ++col)
    basis.key_map_.emplace(pack_key(basis.members_[col], bits), col);
  return basis;
}

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw ArithmeticOverflow(what);
  return out;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw ArithmeticOverflow(what);
  return out;
}

// C(n, k) by the multiplicative formula; each partial product is itself a
// binomial coefficient so the division is exact.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t j = 1; j <= k; ++j) {
    acc = acc * (n - k + j) / j;
    if (acc > UINT64_MAX) throw ArithmeticOverflow("binomial coefficient overflows 64 bits");
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace detail

// Symmetry-reduced basis size: C(n+Q, Q) - 1.
inline std::uint64_t count_sym(std::uint64_t n, std::uint64_t max_degree) {
  if (n < 1 || max_degree < 1) throw InvalidDimension("count_sym: need n >= 1 and Q >= 1");
  const std::uint64_t total = detail::checked_add(n, max_degree, "count_sym: n + Q overflows");
  return detail::binomial(total, max_degree) - 1;
}

// Tensor-product (Kronecker) basis size: (n^{Q+1} - n) / (n - 1), n > 1.
inline std::uint64_t count_tensor(std::uint64_t n, std::uint64_t max_degree) {
  if (n < 2) throw InvalidDimension("count_tensor: formula requires n > 1");
  if (max_degree < 1) throw InvalidDimension("count_tensor: need Q >= 1");
  std::uint64_t power = n;
  for (std::uint64_t k = 0; k < max_degree; ++k)
    power = detail::checked_mul(power, n, "count_tensor: n^(Q+1) overflows 64 bits");
  return (power - n) / (n - 1);
}

}  // namespace carleman
