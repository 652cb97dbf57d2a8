#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carleman/assembly.hpp"
#include "carleman/linalg.hpp"
#include "carleman/operator.hpp"

namespace carleman {

struct TimeSpan {
  double start = 0.0;
  double end = 1.0;

  double length() const { return end - start; }
};

struct TrajectoryMeta {
  std::string solver;
  double dt = 0.0;  // 0 for the adaptive reference
  double rtol = 0.0;
  double atol = 0.0;
  unsigned rhs_degree = 0;
  unsigned lift_degree = 0;  // 0 unless the lifted solver produced it
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  TrajectoryMeta meta;

  std::size_t size() const { return times.size(); }
  std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
};

// t_k = start + k (end - start) / n_steps, with the last node pinned to `end`.
inline std::vector<double> uniform_grid(TimeSpan span, std::size_t n_steps) {
  if (n_steps < 1) throw UsageError("uniform_grid: need at least one step");
  std::vector<double> t(n_steps + 1);
  const double h = span.length() / static_cast<double>(n_steps);
  for (std::size_t k = 0; k <= n_steps; ++k) t[k] = span.start + static_cast<double>(k) * h;
  t.back() = span.end;
  return t;
}

struct ReferenceOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
};

// Dormand-Prince 5(4) with local extrapolation (the system is autonomous, so
// stage times are never needed). Steps are clipped so every
// sample time is hit exactly.
inline Trajectory solve_reference(const PolynomialOperator& op, std::span<const double> x0,
                                  TimeSpan span, const ReferenceOptions& opts,
                                  std::span<const double> sample_times) {
  const std::size_t n = op.dimension();
  if (x0.size() != n) throw DimensionMismatch("solve_reference: initial state size mismatch");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
    throw UsageError("solve_reference: tolerances must be positive");
  if (!(span.end > span.start)) throw UsageError("solve_reference: empty time span");
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (sample_times[k] < span.start || sample_times[k] > span.end)
      throw UsageError("solve_reference: sample time outside the span");
    if (k && sample_times[k] < sample_times[k - 1])
      throw UsageError("solve_reference: sample times must be sorted");
  }

  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (fifth- minus fourth-order weights)
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory traj;
  traj.meta = {"reference", 0.0, opts.rtol, opts.atol, op.degree(), 0};

  Vector x(x0.begin(), x0.end());
  double t = span.start;
  const double min_step = 1e-14 * span.length();
  double h = 1e-3 * span.length();

  Vector k1 = op.eval_rhs(x), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), xnew(n);
  auto stage = [&](Vector& k, auto&& combine) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + combine(i);
    k = op.eval_rhs(tmp);
  };

  for (double target : sample_times) {
    while (t < target) {
      double step = std::min(h, target - t);
      // absorb a sliver that would otherwise force a vanishing final step
      if (target - t - step < 1e-10 * span.length()) step = target - t;
      const bool clipped = step < h;
      while (true) {
        if (step < min_step)
          throw StepSizeUnderflow("solve_reference: step size fell below " + std::to_string(min_step) +
                                  " at t=" + std::to_string(t));
        const double s = step;
        stage(k2, [&](std::size_t i) { return s * a21 * k1[i]; });
        stage(k3, [&](std::size_t i) { return s * (a31 * k1[i] + a32 * k2[i]); });
        stage(k4, [&](std::size_t i) { return s * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]); });
        stage(k5, [&](std::size_t i) {
          return s * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        });
        stage(k6, [&](std::size_t i) {
          return s * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        });
        for (std::size_t i = 0; i < n; ++i)
          xnew[i] = x[i] + s * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = op.eval_rhs(xnew);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double ei = s * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                 e7 * k7[i]);
          const double sc = opts.atol + opts.rtol * std::max(std::abs(x[i]), std::abs(xnew[i]));
          err = std::max(err, std::abs(ei) / sc);
        }
        if (!std::isfinite(err)) {
          step *= 0.1;
          continue;
        }
        if (err <= 1.0) {
          const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
          t = (step == target - t) ? target : t + step;
          x.swap(xnew);
          k1 = k7;
          // a step shortened to land on a sample must not shrink the controller's estimate
          h = clipped ? std::max(h, step * factor) : step * factor;
          break;
        }
        step *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      }
    }
    traj.times.push_back(target);
    traj.states.push_back(x);
  }
  return traj;
}

// Linearly implicit Euler on the Jacobian: (I - dt J(x_n)) dx = dt f(x_n).
inline Trajectory solve_jacobian_euler(const PolynomialOperator& op, std::span<const double> x0,
                                       TimeSpan span, std::size_t n_steps) {
  const std::size_t n = op.dimension();
  if (x0.size() != n) throw DimensionMismatch("solve_jacobian_euler: initial state size mismatch");
  Trajectory traj;
  traj.times = uniform_grid(span, n_steps);
  const double dt = span.length() / static_cast<double>(n_steps);
  traj.meta = {"jacobian", dt, 0.0, 0.0, op.degree(), 0};
  traj.states.reserve(n_steps + 1);

  Vector x(x0.begin(), x0.end());
  traj.states.push_back(x);
  for (std::size_t step = 0; step < n_steps; ++step) {
    Matrix m = op.jacobian(x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - dt * m(i, j);
    Vector rhs = op.eval_rhs(x);
    for (double& v : rhs) v *= dt;
    const Vector dx = solve_dense(m, rhs);
    for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    traj.states.push_back(x);
  }
  return traj;
}

struct LiftedRun {
  Trajectory trajectory;
  LiftedAffineSystem final_system;  // operator assembled at the last step's center
  AssemblyStats totals;             // counters summed over all steps
};

// Moving-center lifted implicit Euler. Each step re-centers at x_n, so the
// lifted deviation starts at z = 0 and (I - dt A_ZZ) z = dt b_Z; the new
// state is x_n plus the degree-1 block of z.
inline LiftedRun run_lifted_euler(const PolynomialOperator& op, const LiftStructure& structure,
                                  std::span<const double> x0, TimeSpan span, std::size_t n_steps,
                                  ClosureMode mode = ClosureMode::Drop) {
  const std::size_t n = op.dimension();
  if (x0.size() != n) throw DimensionMismatch("solve_lifted_euler: initial state size mismatch");
  if (structure.dimension() != n || structure.rhs_degree() != op.degree())
    throw DimensionMismatch("solve_lifted_euler: lift structure does not match the operator");

  LiftedRun run;
  Trajectory& traj = run.trajectory;
  traj.times = uniform_grid(span, n_steps);
  const double dt = span.length() / static_cast<double>(n_steps);
  traj.meta = {"lifted", dt, 0.0, 0.0, op.degree(), structure.lift_degree()};
  traj.states.reserve(n_steps + 1);

  const std::size_t nz = structure.basis_z().size();
  Vector x(x0.begin(), x0.end());
  traj.states.push_back(x);
  for (std::size_t step = 0; step < n_steps; ++step) {
    const ShiftedOperator shifted = shift_operator(op, x);
    LiftedAffineSystem lifted = assemble_lifted(shifted, structure, mode);

    Matrix m = lifted.a_zz.to_dense();
    for (std::size_t r = 0; r < nz; ++r) {
      for (double& v : m.row(r)) v *= -dt;
      m(r, r) += 1.0;
    }
    Vector rhs = lifted.b_z;
    for (double& v : rhs) v *= dt;
    const Vector z = solve_dense(m, rhs);
    for (std::size_t i = 0; i < n; ++i) x[i] += z[i];
    traj.states.push_back(x);

    run.totals.t_shift += lifted.stats.t_shift;
    run.totals.t_lift += lifted.stats.t_lift;
    run.totals.u_ours += lifted.stats.u_ours;
    run.totals.dropped += lifted.stats.dropped;
    run.totals.contributions += lifted.stats.contributions;
    if (step + 1 == n_steps) run.final_system = std::move(lifted);
  }
  return run;
}

inline Trajectory solve_lifted_euler(const PolynomialOperator& op, std::span<const double> x0,
                                     TimeSpan span, std::size_t n_steps, unsigned lift_degree,
                                     ClosureMode mode = ClosureMode::Drop) {
  if (n_steps < 1) throw UsageError("solve_lifted_euler: need at least one step");
  if (lift_degree < op.degree())
    throw InvalidDimension("solve_lifted_euler: lift degree Q=" + std::to_string(lift_degree) +
                           " is below the right-hand side degree P=" + std::to_string(op.degree()));
  const LiftStructure structure = build_lift_structure(op.dimension(), op.degree(), lift_degree);
  return run_lifted_euler(op, structure, x0, span, n_steps, mode).trajectory;
}

}  // namespace carleman
