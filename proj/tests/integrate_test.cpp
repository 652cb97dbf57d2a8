#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "carleman/bench.hpp"
#include "carleman/integrate.hpp"
#include "carleman/metrics.hpp"

namespace carleman {
namespace {

const PolynomialOperator& decay() {
  static const auto op = PolynomialOperator::from_terms(1, 1, {{0, {1}, -1.0}});
  return op;
}

PolynomialOperator random_linear(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PolynomialTerm> terms;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) terms.push_back({i, ExponentVector::unit(n, j), u(rng) - (i == j ? 1.0 : 0.0)});
  return PolynomialOperator::from_terms(n, 1, terms);
}

TEST(Grid, EndpointsAndSpacing) {
  const auto t = uniform_grid({0.0, 2.0}, 4);
  EXPECT_EQ(t, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  EXPECT_THROW(uniform_grid({0.0, 1.0}, 0), UsageError);
}

TEST(Reference, ExponentialDecay) {
  const std::vector<double> samples{0.0, 0.5, 1.0};
  const auto traj = solve_reference(decay(), Vector{1.0}, {0.0, 1.0}, {1e-10, 1e-10}, samples);
  ASSERT_EQ(traj.size(), 3u);
  EXPECT_EQ(traj.times.back(), 1.0);
  EXPECT_NEAR(traj.states[2][0], std::exp(-1.0), 1e-8);
  EXPECT_NEAR(traj.states[1][0], std::exp(-0.5), 1e-8);
  EXPECT_EQ(traj.states[0][0], 1.0);
}

TEST(Reference, DecoupledDrivers) {
  const Demo1Params p;
  const auto op = build_demo1(p);
  const auto grid = uniform_grid({0.0, 10.0}, 50);
  const auto traj = solve_reference(op, Vector{0.0, 1.0, 1.0}, {0.0, 10.0}, {}, grid);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double t = traj.times[k];
    EXPECT_NEAR(traj.states[k][1], std::exp(-p.lambda_u * t), 1e-9);
    EXPECT_NEAR(traj.states[k][2], std::exp(-p.lambda_v * t), 1e-9);
    // closed-form x channel from variation of constants
    const double x = p.k * (std::exp(-(p.lambda_u + p.lambda_v) * t) - std::exp(-p.lambda_x * t)) /
                     (p.lambda_x - p.lambda_u - p.lambda_v);
    EXPECT_NEAR(traj.states[k][0], x, 1e-9);
  }
}

TEST(Reference, LogisticClosedForm) {
  const auto op = PolynomialOperator::from_terms(1, 2, {{0, {1}, 1.0}, {0, {2}, -1.0}});
  const auto traj = solve_reference(op, Vector{0.2}, {0.0, 5.0}, {}, std::vector<double>{5.0});
  const double e5 = std::exp(5.0);
  EXPECT_NEAR(traj.states[0][0], 0.2 * e5 / (1.0 + 0.2 * (e5 - 1.0)), 1e-7);
}

TEST(Reference, TighterTolerancesAgree) {
  const auto pb = demo_problem("demo2");
  const auto grid = uniform_grid(pb.span, 100);
  const auto a = solve_reference(pb.system, pb.x_init, pb.span, {1e-8, 1e-8}, grid);
  const auto b = solve_reference(pb.system, pb.x_init, pb.span, {5e-9, 5e-9}, grid);
  EXPECT_LT(max_error(a, b).max_error, 10 * 1e-8);
}

TEST(Reference, FiniteTimeBlowUpUnderflows) {
  const auto op = PolynomialOperator::from_terms(1, 2, {{0, {2}, 1.0}});
  EXPECT_THROW(solve_reference(op, Vector{1.0}, {0.0, 2.0}, {}, std::vector<double>{2.0}), StepSizeUnderflow);
}

TEST(Reference, RejectsBadArguments) {
  EXPECT_THROW(solve_reference(decay(), Vector{1.0}, {0.0, 1.0}, {0.0, 1e-8}, std::vector<double>{1.0}),
               UsageError);
  EXPECT_THROW(solve_reference(decay(), Vector{1.0}, {0.0, 1.0}, {}, std::vector<double>{2.0}), UsageError);
  EXPECT_THROW(solve_reference(decay(), Vector{1.0, 2.0}, {0.0, 1.0}, {}, std::vector<double>{1.0}),
               DimensionMismatch);
}

TEST(JacobianEuler, SingleStepByHand) {
  const auto traj = solve_jacobian_euler(decay(), Vector{1.0}, {0.0, 0.1}, 1);
  EXPECT_NEAR(traj.states[1][0], 10.0 / 11.0, 1e-15);
  EXPECT_DOUBLE_EQ(traj.meta.dt, 0.1);
}

TEST(JacobianEuler, LinearSystemIsExactImplicitEuler) {
  std::mt19937_64 rng(4);
  const auto op = random_linear(rng, 3);
  const double dt = 0.05;
  const auto traj = solve_jacobian_euler(op, Vector{1.0, -0.5, 0.25}, {0.0, 20 * dt}, 20);
  Matrix m = Matrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) -= dt * op.coeffs()(i, j);
  Vector x{1.0, -0.5, 0.25};
  for (std::size_t k = 1; k < traj.size(); ++k) {
    x = solve_dense(m, x);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(traj.states[k][i], x[i], 1e-13);
  }
}

TEST(JacobianEuler, EquilibriumStaysPut) {
  const auto traj = solve_jacobian_euler(build_demo2(), Vector{0.0, 0.0}, {0.0, 5.0}, 10);
  for (const auto& s : traj.states) EXPECT_EQ(s, (Vector{0.0, 0.0}));
}

TEST(JacobianEuler, SingularStepMatrix) {
  const auto op = PolynomialOperator::from_terms(1, 1, {{0, {1}, 10.0}});
  EXPECT_THROW(solve_jacobian_euler(op, Vector{1.0}, {0.0, 0.1}, 1), SingularMatrix);
}

TEST(LiftedEuler, ScalarDecayMatchesJacobian) {
  const auto traj = solve_lifted_euler(decay(), Vector{1.0}, {0.0, 0.1}, 1, 1);
  EXPECT_NEAR(traj.states[1][0], 10.0 / 11.0, 1e-15);
  EXPECT_EQ(traj.meta.lift_degree, 1u);
}

TEST(LiftedEuler, LinearSystemsMatchJacobianForAnyDegree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const auto op = random_linear(rng, 2 + trial % 2);
    Vector x0(op.dimension());
    for (auto& v : x0) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    const auto jac = solve_jacobian_euler(op, x0, {0.0, 2.0}, 100);
    for (unsigned q = 1; q <= 3; ++q) {
      const auto lifted = solve_lifted_euler(op, x0, {0.0, 2.0}, 100, q);
      EXPECT_LE(max_error(lifted, jac).max_error, 1e-10) << "Q=" << q;
    }
  }
}

TEST(LiftedEuler, FixedPoints) {
  // pick dt so 1/dt misses every mode k + 0.8 m of A_ZZ at the origin
  const auto origin = solve_lifted_euler(build_demo2(), Vector{0.0, 0.0}, {0.0, 5.0}, 11, 3);
  for (const auto& s : origin.states) EXPECT_EQ(s, (Vector{0.0, 0.0}));
  const auto interior = solve_lifted_euler(build_demo2(), Vector{0.8, 0.4}, {0.0, 5.0}, 10, 3);
  for (const auto& s : interior.states) {
    EXPECT_NEAR(s[0], 0.8, 1e-14);
    EXPECT_NEAR(s[1], 0.4, 1e-14);
  }
}

TEST(LiftedEuler, RunKeepsFinalOperatorAndTotals) {
  const auto pb = demo_problem("demo2");
  const auto structure = build_lift_structure(2, 2, 3);
  const auto run = run_lifted_euler(pb.system, structure, pb.x_init, pb.span, 20);
  EXPECT_EQ(run.final_system.center, run.trajectory.states[19]);
  EXPECT_EQ(run.totals.t_lift, 20 * structure.lift_tuples().size());
  EXPECT_EQ(run.final_system.a_zz.rows(), structure.basis_z().size());
}

TEST(LiftedEuler, PreconditionErrors) {
  const auto op = build_demo2();
  EXPECT_THROW(solve_lifted_euler(op, Vector{0.2, 0.3}, {0.0, 1.0}, 10, 1), InvalidDimension);
  EXPECT_THROW(solve_lifted_euler(op, Vector{0.2, 0.3}, {0.0, 1.0}, 0, 2), UsageError);
  EXPECT_THROW(solve_lifted_euler(op, Vector{0.2}, {0.0, 1.0}, 10, 2), DimensionMismatch);
}

TEST(Convergence, ScalarDecayIsFirstOrder) {
  std::vector<double> dts, errs;
  for (std::size_t n : {20u, 40u, 80u, 160u}) {
    const auto grid = uniform_grid({0.0, 1.0}, n);
    const auto ref = solve_reference(decay(), Vector{1.0}, {0.0, 1.0}, {}, grid);
    const auto rep = max_error(solve_lifted_euler(decay(), Vector{1.0}, {0.0, 1.0}, n, 2), ref);
    dts.push_back(rep.dt);
    errs.push_back(rep.max_error);
  }
  EXPECT_NEAR(*loglog_slope(dts, errs), 1.0, 0.05);
}

}  // namespace
}  // namespace carleman
