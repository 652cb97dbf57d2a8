#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "carleman/basis.hpp"

namespace carleman {
namespace {

// Every exponent vector in [0, D]^n with total degree 1..D, by odometer.
std::vector<std::vector<unsigned>> enumerate_exponents(std::size_t n, unsigned max_degree) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> e(n, 0);
  while (true) {
    unsigned d = 0;
    for (unsigned v : e) d += v;
    if (d >= 1 && d <= max_degree) out.push_back(e);
    std::size_t j = 0;
    while (j < n && e[j] == max_degree) e[j++] = 0;
    if (j == n) break;
    ++e[j];
  }
  return out;
}

TEST(Basis, SingleVariable) {
  const auto b = generate_basis(1, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], (ExponentVector{1}));
  EXPECT_EQ(b[1], (ExponentVector{2}));
  EXPECT_EQ(b[2], (ExponentVector{3}));
}

TEST(Basis, DegreeOneIsUnitVectors) {
  const auto b = generate_basis(3, 1);
  ASSERT_EQ(b.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(b[i], ExponentVector::unit(3, i));
}

TEST(Basis, TwoVariablesDegreeTwoOrdering) {
  const auto b = generate_basis(2, 2);
  const std::vector<ExponentVector> expected{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  EXPECT_EQ(b.members(), expected);
  EXPECT_EQ(b.degree_block(2), (std::pair<std::size_t, std::size_t>{2, 5}));
}

TEST(Basis, OrderingIsDegreeMajorThenLexicographicDescending) {
  const auto b = generate_basis(4, 4);
  for (std::size_t c = 1; c < b.size(); ++c) {
    const auto& prev = b[c - 1];
    const auto& cur = b[c];
    if (prev.degree() == cur.degree())
      EXPECT_TRUE(std::lexicographical_compare(cur.values().begin(), cur.values().end(), prev.values().begin(),
                                               prev.values().end()))
          << prev.to_string() << " before " << cur.to_string();
    else
      EXPECT_LT(prev.degree(), cur.degree());
  }
}

TEST(Basis, LowerDegreeBasisIsPrefix) {
  const auto y = generate_basis(3, 2);
  const auto z = generate_basis(3, 5);
  for (std::size_t c = 0; c < y.size(); ++c) EXPECT_EQ(y[c], z[c]);
}

TEST(Basis, MatchesBruteForceEnumeration) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (unsigned q = 1; q <= 5; ++q) {
      const auto b = generate_basis(n, q);
      std::set<std::vector<unsigned>> got;
      for (const auto& m : b.members()) got.insert(m.values());
      const auto all = enumerate_exponents(n, q);
      EXPECT_EQ(got, std::set<std::vector<unsigned>>(all.begin(), all.end())) << "n=" << n << " Q=" << q;
      EXPECT_EQ(got.size(), b.size());
    }
  }
}

TEST(Basis, DeterministicAcrossCalls) {
  EXPECT_EQ(generate_basis(5, 4).members(), generate_basis(5, 4).members());
}

TEST(Basis, KeyMapRecoversEveryColumn) {
  const auto b = generate_basis(4, 5);
  for (std::size_t c = 0; c < b.size(); ++c) {
    ASSERT_EQ(b.find(pack_key(b[c], b.bits())), c);
    ASSERT_EQ(b.find(b[c]), c);
  }
  EXPECT_FALSE(b.find(ExponentVector{6, 0, 0, 0}).has_value());
}

TEST(Basis, InvalidArguments) {
  EXPECT_THROW(generate_basis(0, 3), InvalidDimension);
  EXPECT_THROW(generate_basis(2, 0), InvalidDimension);
  EXPECT_THROW(generate_basis(30, 8), PackingOverflow);  // 30 * 5 bits
  EXPECT_NO_THROW(generate_basis(32, 1));               // 32 * 2 = 64 bits exactly
  EXPECT_THROW(generate_basis(33, 1), PackingOverflow);
}

TEST(Bits, KnownWidths) {
  EXPECT_EQ(bits_required(1), 2u);
  EXPECT_EQ(bits_required(4), 4u);
  EXPECT_EQ(bits_required(8), 5u);
  for (unsigned q = 1; q < 300; ++q) {
    const unsigned b = bits_required(q);
    EXPECT_GE(1ULL << b, 2ULL * q + 1);
    EXPECT_LT(1ULL << (b - 1), 2ULL * q + 1);
  }
}

TEST(PackKey, FormulaValues) {
  EXPECT_EQ(pack_key(ExponentVector{0, 0}, 7), 0u);
  EXPECT_EQ(pack_key(ExponentVector{1, 2}, 4), 33u);
  EXPECT_EQ(pack_key(ExponentVector{3, 0, 1}, 3), 67u);
}

TEST(PackKey, RejectsOverflow) {
  EXPECT_THROW(pack_key(ExponentVector{4, 0}, 2), PackingOverflow);
  EXPECT_THROW(pack_key(ExponentVector(std::vector<unsigned>(17, 0)), 4), PackingOverflow);
  EXPECT_EQ(unpack_key(pack_key(ExponentVector{5, 0, 9}, 4), 3, 4), (ExponentVector{5, 0, 9}));
}

TEST(PackKey, InjectiveOverMembersAndPairwiseSums) {
  for (std::size_t n = 1; n <= 3; ++n) {
    for (unsigned q = 1; q <= 4; ++q) {
      const auto b = generate_basis(n, q);
      std::set<std::vector<unsigned>> vectors;
      std::set<PackedKey> keys;
      auto add = [&](const ExponentVector& e) {
        if (vectors.insert(e.values()).second) {
          EXPECT_TRUE(keys.insert(pack_key(e, b.bits())).second);
        }
      };
      for (const auto& a : b.members()) {
        add(a);
        for (const auto& c : b.members()) add(a + c);
      }
      EXPECT_EQ(vectors.size(), keys.size());
    }
  }
}

TEST(Counts, Symmetric) {
  EXPECT_EQ(count_sym(2, 3), 9u);
  EXPECT_EQ(count_sym(1, 5), 5u);
  EXPECT_EQ(count_sym(3, 4), 34u);
  EXPECT_EQ(count_sym(3, 4), enumerate_exponents(3, 4).size());
  EXPECT_THROW(count_sym(1000, 1000), ArithmeticOverflow);
  EXPECT_THROW(count_sym(0, 1), InvalidDimension);
}

TEST(Counts, Tensor) {
  EXPECT_EQ(count_tensor(2, 3), 14u);
  EXPECT_EQ(count_tensor(3, 2), 12u);
  EXPECT_EQ(count_tensor(2, 1), 2u);
  EXPECT_THROW(count_tensor(1, 3), InvalidDimension);
  EXPECT_THROW(count_tensor(10, 30), ArithmeticOverflow);
  for (std::uint64_t n = 2; n <= 6; ++n)
    for (std::uint64_t q = 1; q <= 8; ++q) {
      std::uint64_t sum = 0, p = 1;
      for (std::uint64_t k = 1; k <= q; ++k) sum += (p *= n);
      EXPECT_EQ(count_tensor(n, q), sum);
    }
}

}  // namespace
}  // namespace carleman
