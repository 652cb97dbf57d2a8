#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "carleman/errors.hpp"

namespace carleman {

using Vector = std::vector<double>;

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector operator*(std::span<const double> x) const {
    if (x.size() != cols_) throw DimensionMismatch("matrix-vector product: size mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) acc += data_[i * cols_ + j] * x[j];
      y[i] = acc;
    }
    return y;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  // max_i sum_j |a_ij|
  double norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (double v : row(i)) s += std::abs(v);
      m = std::max(m, s);
    }
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// LU factorization with partial pivoting, PA = LU, stored in place.
// A pivot smaller than 1e-14 * max|a_ij| is treated as singular.
class LuDecomposition {
 public:
  static constexpr double kPivotTolerance = 1e-14;

  explicit LuDecomposition(Matrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw DimensionMismatch("LU: matrix must be square");
    const double scale = lu_.max_abs();
    if (n > 0 && scale == 0.0) throw SingularMatrix("LU: zero matrix");
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (!(best >= kPivotTolerance * scale))
        throw SingularMatrix("LU: pivot " + std::to_string(best) + " at column " +
                             std::to_string(k) + " below tolerance");
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const { return lu_.rows(); }

  Vector solve(std::span<const double> rhs) const {
    const std::size_t n = lu_.rows();
    if (rhs.size() != n) throw DimensionMismatch("LU solve: rhs size mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
      double acc = x[i];
      for (std::size_t j = 0; j < i; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc;
    }
    for (std::size_t i = n; i-- > 0;) {
      double acc = x[i];
      for (std::size_t j = i + 1; j < n; ++j) acc -= lu_(i, j) * x[j];
      x[i] = acc / lu_(i, i);
    }
    return x;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

inline Vector solve_dense(const Matrix& m, std::span<const double> rhs) {
  if (m.rows() != rhs.size()) throw DimensionMismatch("solve_dense: rhs size mismatch");
  return LuDecomposition(m).solve(rhs);
}

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix with unique, column-sorted entries per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Sorts by (row, col) and sums duplicates. The sort is stable, so entries
  // sharing a coordinate are summed in generation order.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets)
      if (t.row >= rows || t.col >= cols) throw DimensionMismatch("triplet index out of range");
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(rows, cols);
    for (std::size_t k = 0; k < triplets.size();) {
      const std::size_t r = triplets[k].row;
      const std::size_t c = triplets[k].col;
      double sum = 0.0;
      for (; k < triplets.size() && triplets[k].row == r && triplets[k].col == c; ++k)
        sum += triplets[k].value;
      m.col_idx_.push_back(c);
      m.values_.push_back(sum);
      ++m.row_ptr_[r + 1];
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

  bool contains(std::size_t r, std::size_t c) const { return find(r, c) != nullptr; }

  double at(std::size_t r, std::size_t c) const {
    const double* v = find(r, c);
    return v ? *v : 0.0;
  }

  Vector operator*(std::span<const double> x) const {
    if (x.size() != cols_) throw DimensionMismatch("CSR product: size mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      double acc = 0.0;
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
      y[r] = acc;
    }
    return y;
  }

  Matrix to_dense() const {
    Matrix m(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) m(r, col_idx_[k]) = values_[k];
    return m;
  }

 private:
  const double* find(std::size_t r, std::size_t c) const {
    if (r >= rows_) return nullptr;
    auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return nullptr;
    return &values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

}  // namespace carleman
