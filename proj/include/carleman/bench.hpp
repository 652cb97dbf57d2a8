#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "carleman/assembly.hpp"
#include "carleman/integrate.hpp"
#include "carleman/io.hpp"
#include "carleman/metrics.hpp"
#include "carleman/operator.hpp"

namespace carleman {

// Bilinear driver: xdot = -lx x + k u v, udot = -lu u, vdot = -lv v.
// The default parameters are not published values; they keep lx != lu + lv
// so the closed-form x(t) stays well conditioned.
struct Demo1Params {
  double lambda_x = 1.0;
  double lambda_u = 0.5;
  double lambda_v = 0.7;
  double k = 1.0;
};

inline PolynomialOperator build_demo1(const Demo1Params& p = {}) {
  return PolynomialOperator::from_terms(3, 2,
                                        {{0, {1, 0, 0}, -p.lambda_x},
                                         {0, {0, 1, 1}, p.k},
                                         {1, {0, 1, 0}, -p.lambda_u},
                                         {2, {0, 0, 1}, -p.lambda_v}});
}

// Logistic interaction: xdot = a x - b x^2 - c x y, ydot = d y - e y^2 - f x y
// with (a, b, c, d, e, f) = (1.0, 1.0, 0.5, 0.8, 1.2, 0.4).
inline PolynomialOperator build_demo2() {
  constexpr double a = 1.0, b = 1.0, c = 0.5, d = 0.8, e = 1.2, f = 0.4;
  return PolynomialOperator::from_terms(2, 2,
                                        {{0, {1, 0}, a},
                                         {0, {2, 0}, -b},
                                         {0, {1, 1}, -c},
                                         {1, {0, 1}, d},
                                         {1, {0, 2}, -e},
                                         {1, {1, 1}, -f}});
}

struct Problem {
  std::string name;
  PolynomialOperator system;
  Vector x_init;
  TimeSpan span;
};

inline Problem demo_problem(const std::string& id) {
  if (id == "demo1") return {"demo1", build_demo1(), {0.0, 1.0, 1.0}, {0.0, 10.0}};
  if (id == "demo2") return {"demo2", build_demo2(), {0.2, 0.3}, {0.0, 20.0}};
  throw UsageError("unknown demo '" + id + "' (expected demo1 or demo2)");
}

struct SweepConfig {
  Problem problem;
  std::vector<unsigned> lift_degrees;
  std::vector<std::size_t> n_eval;  // samples per grid; n_steps = n_eval - 1
  ReferenceOptions reference;
  ClosureMode mode = ClosureMode::Drop;
  unsigned workers = 1;
  std::filesystem::path output_dir;  // empty: nothing is written
  std::size_t max_stored_samples = 2001;
};

struct SweepCell {
  std::string method;        // "jacobian" or "lifted"
  unsigned lift_degree = 0;  // 0 for the Jacobian baseline
  std::size_t n_eval = 0;
  std::optional<ErrorReport> report;  // empty when the cell failed
  std::string failure;

  std::string label() const {
    return method == "lifted" ? "lifted_Q" + std::to_string(lift_degree) : method;
  }
  std::string directory() const {
    return method + "_Q" + std::to_string(lift_degree) + "_N" + std::to_string(n_eval);
  }
};

struct SweepResult {
  std::vector<SweepCell> cells;  // sorted by (method, lift_degree, n_eval)
  std::map<std::string, std::optional<double>> slopes;

  const SweepCell* find(const std::string& method, unsigned q, std::size_t n_eval) const {
    for (const auto& c : cells)
      if (c.method == method && c.lift_degree == q && c.n_eval == n_eval) return &c;
    return nullptr;
  }
};

namespace detail {

// Runs jobs[0..count) on up to `workers` threads; each job owns its output slot.
inline void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) job(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) job(k);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

// trajectory.csv (thinned), report.json when a report exists, and the final
// lifted operator (a_zz.mtx, b_z.csv, stats.json) for lifted runs.
inline void write_run_outputs(const std::filesystem::path& dir, const Trajectory& traj,
                              const ErrorReport* report, const LiftedAffineSystem* final_system,
                              std::size_t max_stored_samples = 2001) {
  io::write_file(dir / "trajectory.csv", io::trajectory_csv(io::thin(traj, max_stored_samples)));
  if (report) io::write_file(dir / "report.json", io::report_json(*report).dump(2) + '\n');
  if (final_system) {
    io::write_file(dir / "a_zz.mtx", io::matrix_market(final_system->a_zz));
    io::write_file(dir / "b_z.csv", io::vector_csv(final_system->b_z));
    io::write_file(dir / "stats.json", io::stats_json(final_system->stats).dump(2) + '\n');
  }
}

inline std::string summary_csv(const SweepResult& result) {
  std::string out = "method,degZ,n_eval,dt,max_error,frob_error\n";
  for (const auto& c : result.cells) {
    out += c.method + ',' + std::to_string(c.lift_degree) + ',' + std::to_string(c.n_eval) + ',';
    if (c.report)
      out += io::format_double(c.report->dt) + ',' + io::format_double(c.report->max_error) + ',' +
             io::format_double(c.report->frob_error);
    else
      out += "FAILED,FAILED,FAILED";
    out += '\n';
  }
  return out;
}

inline std::map<std::string, std::optional<double>> convergence_slopes(const std::vector<SweepCell>& cells) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
  for (const auto& c : cells) {
    auto& s = series[c.label()];
    if (c.report) {
      s.first.push_back(c.report->dt);
      s.second.push_back(c.report->max_error);
    }
  }
  std::map<std::string, std::optional<double>> out;
  for (const auto& [label, s] : series) out[label] = loglog_slope(s.first, s.second);
  return out;
}

// One reference per grid, then the Jacobian baseline and one lifted run per
// lift degree on every grid. A failing cell is recorded, not propagated.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  const Problem& pb = cfg.problem;
  for (unsigned q : cfg.lift_degrees)
    if (q < pb.system.degree())
      throw UsageError("sweep: lift degree " + std::to_string(q) + " is below the system degree " +
                       std::to_string(pb.system.degree()));
  for (std::size_t n : cfg.n_eval)
    if (n < 2) throw UsageError("sweep: n_eval entries must be >= 2");

  std::vector<unsigned> degrees = cfg.lift_degrees;
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());
  std::vector<std::size_t> grids = cfg.n_eval;
  std::sort(grids.begin(), grids.end());
  grids.erase(std::unique(grids.begin(), grids.end()), grids.end());

  std::vector<std::optional<Trajectory>> refs(grids.size());
  std::vector<std::string> ref_failure(grids.size());
  detail::parallel_for(grids.size(), cfg.workers, [&](std::size_t g) {
    try {
      const auto times = uniform_grid(pb.span, grids[g] - 1);
      refs[g] = solve_reference(pb.system, pb.x_init, pb.span, cfg.reference, times);
    } catch (const Error& e) {
      ref_failure[g] = e.what();
    }
  });

  std::map<unsigned, LiftStructure> structures;
  for (unsigned q : degrees)
    structures.emplace(q, build_lift_structure(pb.system.dimension(), pb.system.degree(), q));

  SweepResult result;
  for (std::size_t g = 0; g < grids.size(); ++g) result.cells.push_back({"jacobian", 0, grids[g], {}, {}});
  for (unsigned q : degrees)
    for (std::size_t g = 0; g < grids.size(); ++g) result.cells.push_back({"lifted", q, grids[g], {}, {}});

  detail::parallel_for(result.cells.size(), cfg.workers, [&](std::size_t k) {
    SweepCell& cell = result.cells[k];
    const std::size_t g = static_cast<std::size_t>(
        std::lower_bound(grids.begin(), grids.end(), cell.n_eval) - grids.begin());
    if (!refs[g]) {
      cell.failure = "reference: " + ref_failure[g];
      return;
    }
    try {
      Trajectory traj;
      std::optional<LiftedAffineSystem> final_system;
      if (cell.method == "jacobian") {
        traj = solve_jacobian_euler(pb.system, pb.x_init, pb.span, cell.n_eval - 1);
      } else {
        LiftedRun run = run_lifted_euler(pb.system, structures.at(cell.lift_degree), pb.x_init, pb.span,
                                         cell.n_eval - 1, cfg.mode);
        traj = std::move(run.trajectory);
        final_system = std::move(run.final_system);
      }
      cell.report = max_error(traj, *refs[g]);
      if (!cfg.output_dir.empty())
        write_run_outputs(cfg.output_dir / cell.directory(), traj, &*cell.report,
                          final_system ? &*final_system : nullptr, cfg.max_stored_samples);
    } catch (const Error& e) {
      cell.report.reset();
      cell.failure = e.what();
    }
  });

  result.slopes = convergence_slopes(result.cells);

  if (!cfg.output_dir.empty()) {
    io::write_file(cfg.output_dir / "summary.csv", summary_csv(result));
    io::json slopes = io::json::object();
    for (const auto& [label, s] : result.slopes) slopes[label] = s ? io::json(*s) : io::json(nullptr);
    io::write_file(cfg.output_dir / "slopes.json", slopes.dump(2) + '\n');

    io::json meta = {{"problem", pb.name},
                     {"system", io::system_to_json(pb.system)},
                     {"x_init", pb.x_init},
                     {"t_span", {pb.span.start, pb.span.end}},
                     {"lift_degrees", degrees},
                     {"n_eval", grids},
                     {"reference", {{"rtol", cfg.reference.rtol}, {"atol", cfg.reference.atol}}},
                     {"closure", to_string(cfg.mode)}};
    if (pb.name == "demo1")
      meta["note"] = "demo1 parameters and initial condition are library defaults, not published values";
    io::json failures = io::json::object();
    for (const auto& c : result.cells)
      if (!c.report) failures[c.directory()] = c.failure;
    if (!failures.empty()) meta["failed_cells"] = failures;
    io::write_file(cfg.output_dir / "config.json", meta.dump(2) + '\n');
  }
  return result;
}

}  // namespace carleman
