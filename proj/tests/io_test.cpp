#include <gtest/gtest.h>

#include <random>

#include "carleman/bench.hpp"
#include "carleman/io.hpp"

namespace carleman {
namespace {

TEST(SystemJson, ParsesDefinition) {
  const auto j = io::json::parse(R"({"n": 2, "P": 2, "terms": [
      {"row": 0, "exponents": [1, 0], "coeff": 1.0},
      {"row": 0, "exponents": [1, 1], "coeff": -0.5},
      {"row": 1, "exponents": [0, 2], "coeff": -1.2}]})");
  const auto op = io::system_from_json(j);
  EXPECT_EQ(op.dimension(), 2u);
  EXPECT_EQ(op.coeffs()(0, 3), -0.5);
  EXPECT_EQ(op.coeffs()(1, 4), -1.2);
}

TEST(SystemJson, RoundTripPreservesOperator) {
  const auto op = build_demo1();
  const auto back = io::system_from_json(io::json::parse(io::system_to_json(op).dump()));
  EXPECT_EQ(back.coeffs(), op.coeffs());
}

TEST(SystemJson, Malformed) {
  EXPECT_THROW(io::system_from_json(io::json::parse(R"({"n": 2})")), UsageError);
  EXPECT_THROW(io::system_from_json(io::json::parse(R"({"n": 2, "P": 1, "terms": [{"row": 0,
      "exponents": [2, 0], "coeff": 1}]})")),
               DegreeOutOfRange);
}

TEST(Formats, DoublesRoundTripExactly) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Formats, TrajectoryCsv) {
  Trajectory t;
  t.times = {0.0, 0.5};
  t.states = {{1.0, 2.0}, {0.25, -1.0}};
  EXPECT_EQ(io::trajectory_csv(t), "t,x1,x2\n0,1,2\n0.5,0.25,-1\n");
}

TEST(Formats, ThinningKeepsEndpoints) {
  Trajectory t;
  for (int k = 0; k <= 10000; ++k) {
    t.times.push_back(k * 1e-3);
    t.states.push_back({double(k)});
  }
  const auto thinned = io::thin(t, 2001);
  EXPECT_LE(thinned.size(), 2001u);
  EXPECT_EQ(thinned.times.front(), 0.0);
  EXPECT_EQ(thinned.times.back(), t.times.back());
  EXPECT_EQ(io::thin(thinned, 5000).size(), thinned.size());
}

TEST(Formats, MatrixMarketRoundTrip) {
  const auto m = CsrMatrix::from_triplets(3, 3, {{0, 0, -1.5}, {2, 1, 0.1}, {1, 2, 3.0}});
  const std::string text = io::matrix_market(m);
  EXPECT_EQ(text.rfind("%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 -1.5\n", 0), 0u);
  const auto back = io::read_matrix_market(text);
  EXPECT_EQ(back.values(), m.values());
  EXPECT_EQ(back.col_idx(), m.col_idx());
}

TEST(Formats, StatsAndReportJson) {
  AssemblyStats s{3, 12, 5, 1, 6};
  const auto j = io::stats_json(s);
  EXPECT_EQ(j.dump(), R"({"dropped":1,"t_lift":12,"t_shift":3,"u_ours":5})");
  ErrorReport r{0.1, 10, 0.5, 0.9, {0.3, 0.4}};
  const auto back = io::report_from_json(io::report_json(r));
  EXPECT_EQ(back.per_state_max, r.per_state_max);
  EXPECT_EQ(back.max_error, r.max_error);
}

TEST(Formats, ParseVector) {
  EXPECT_EQ(io::parse_vector("0.2,0.3"), (Vector{0.2, 0.3}));
  EXPECT_THROW(io::parse_vector("0.2,abc"), UsageError);
  EXPECT_THROW(io::parse_vector("0.2x"), UsageError);
}

}  // namespace
}  // namespace carleman
