#include <gtest/gtest.h>

#include <random>

#include "carleman/linalg.hpp"

namespace carleman {
namespace {

TEST(SolveDense, Identity) {
  const Vector rhs{1.5, -2.0, 3.25};
  EXPECT_EQ(solve_dense(Matrix::identity(3), rhs), rhs);
}

TEST(SolveDense, Diagonal) {
  Matrix m(2, 2);
  m(0, 0) = 2;
  m(1, 1) = 4;
  const Vector x = solve_dense(m, Vector{2, 8});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(SolveDense, NeedsPivoting) {
  Matrix m(2, 2);
  m(0, 1) = 1;
  m(1, 0) = 1;
  const Vector x = solve_dense(m, Vector{3, 5});
  EXPECT_DOUBLE_EQ(x[0], 5.0);
  EXPECT_DOUBLE_EQ(x[1], 3.0);
}

TEST(SolveDense, ResidualBoundOnRandomSystem) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 50;
  Matrix m(n, n);
  Vector rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
    m(i, i) += 10.0;
    rhs[i] = u(rng);
  }
  const Vector x = solve_dense(m, rhs);
  const Vector mx = m * x;
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(mx[i] - rhs[i]));
  EXPECT_LE(res, 1e-10 * (m.norm_inf() * norm_inf(x) + norm_inf(rhs)));
}

TEST(SolveDense, SingularAndShapeErrors) {
  Matrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 2;
  m(1, 1) = 4;
  EXPECT_THROW(solve_dense(m, Vector{1, 1}), SingularMatrix);
  EXPECT_THROW(solve_dense(Matrix(2, 2), Vector{1, 1}), SingularMatrix);
  EXPECT_THROW(solve_dense(Matrix::identity(2), Vector{1, 1, 1}), DimensionMismatch);
  EXPECT_THROW(LuDecomposition(Matrix(2, 3)), DimensionMismatch);
}

TEST(Csr, CoalescesDuplicatesInGenerationOrder) {
  const auto m = CsrMatrix::from_triplets(3, 3, {{2, 1, 1.0}, {0, 0, 0.5}, {2, 1, 1.0}, {0, 2, -1.0}});
  EXPECT_EQ(m.nnz(), 3u);
  EXPECT_EQ(m.at(2, 1), 2.0);
  EXPECT_EQ(m.at(0, 0), 0.5);
  EXPECT_EQ(m.at(1, 1), 0.0);
  EXPECT_FALSE(m.contains(1, 1));
  EXPECT_EQ(m.row_ptr(), (std::vector<std::size_t>{0, 2, 2, 3}));
  const Vector y = m * Vector{1, 2, 3};
  EXPECT_EQ(y, (Vector{0.5 - 3.0, 0.0, 4.0}));
  EXPECT_THROW(CsrMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), DimensionMismatch);
}

TEST(Csr, DenseRoundTrip) {
  const auto m = CsrMatrix::from_triplets(2, 3, {{1, 2, 4.0}, {0, 1, -1.0}});
  const Matrix d = m.to_dense();
  EXPECT_EQ(d(1, 2), 4.0);
  EXPECT_EQ(d(0, 1), -1.0);
  EXPECT_EQ(d(0, 0), 0.0);
}

}  // namespace
}  // namespace carleman
