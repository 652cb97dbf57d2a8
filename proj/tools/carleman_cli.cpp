// Command-line front end: basis, assemble, run, sweep, report.
// Exit codes: 0 success, 1 numerical failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carleman/carleman.hpp"

namespace fs = std::filesystem;
using namespace carleman;
using io::json;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;

// Problem and sweep settings, filled from demo defaults, then a config file,
// then explicit flags (highest precedence).
struct ProblemFlags {
  std::string demo;
  std::string system_path;
  std::string config_path;
  std::string x_init;
  double t0 = 0.0;
  double t1 = 0.0;
  double rtol = 1e-10;
  double atol = 1e-10;
  std::string mode = "drop";

  CLI::Option* demo_opt = nullptr;
  CLI::Option* system_opt = nullptr;
  CLI::Option* x_init_opt = nullptr;
  CLI::Option* t0_opt = nullptr;
  CLI::Option* t1_opt = nullptr;
  CLI::Option* rtol_opt = nullptr;
  CLI::Option* atol_opt = nullptr;
  CLI::Option* mode_opt = nullptr;

  void attach(CLI::App* cmd) {
    demo_opt = cmd->add_option("--demo", demo, "Built-in problem: demo1 or demo2");
    system_opt = cmd->add_option("--system", system_path, "System definition JSON");
    cmd->add_option("--config", config_path, "Config JSON (flags override its values)");
    x_init_opt = cmd->add_option("--x-init", x_init, "Initial state, comma separated");
    t0_opt = cmd->add_option("--t0", t0, "Start time");
    t1_opt = cmd->add_option("--t1", t1, "End time");
    rtol_opt = cmd->add_option("--rtol", rtol, "Reference solver relative tolerance");
    atol_opt = cmd->add_option("--atol", atol, "Reference solver absolute tolerance");
    mode_opt = cmd->add_option("--mode", mode, "Closure mode: drop or fold");
  }
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    json j = json::parse(io::read_file(path));
    if (!j.is_object()) throw UsageError(path + ": config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

template <typename T>
T config_value(const json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config field '") + key + "': " + e.what());
  }
}

struct ResolvedProblem {
  Problem problem;
  ReferenceOptions reference;
  ClosureMode mode = ClosureMode::Drop;
};

ResolvedProblem resolve_problem(const ProblemFlags& f, const json& cfg) {
  std::string demo = config_value<std::string>(cfg, "demo", "");
  std::string system = config_value<std::string>(cfg, "system", "");
  if (f.demo_opt->count()) demo = f.demo, system.clear();
  if (f.system_opt->count()) system = f.system_path, demo.clear();
  if (demo.empty() && system.empty()) throw UsageError("one of --demo or --system is required");

  ResolvedProblem out;
  if (!demo.empty()) {
    out.problem = demo_problem(demo);
  } else {
    out.problem.name = fs::path(system).stem().string();
    out.problem.system = io::load_system(system);
    out.problem.x_init.assign(out.problem.system.dimension(), 0.0);
    out.problem.span = {0.0, 1.0};
  }
  Problem& pb = out.problem;
  pb.x_init = config_value<Vector>(cfg, "x_init", pb.x_init);
  if (cfg.contains("t_span")) {
    const auto span = config_value<std::vector<double>>(cfg, "t_span", {});
    if (span.size() != 2) throw UsageError("config field 't_span' needs two entries");
    pb.span = {span[0], span[1]};
  }
  if (f.x_init_opt->count()) pb.x_init = io::parse_vector(f.x_init);
  if (f.t0_opt->count()) pb.span.start = f.t0;
  if (f.t1_opt->count()) pb.span.end = f.t1;
  if (pb.x_init.size() != pb.system.dimension())
    throw UsageError("initial state has " + std::to_string(pb.x_init.size()) + " entries, system has " +
                     std::to_string(pb.system.dimension()));
  if (!(pb.span.end > pb.span.start)) throw UsageError("time span must satisfy t1 > t0");

  out.reference.rtol = f.rtol_opt->count() ? f.rtol : config_value<double>(cfg, "rtol", f.rtol);
  out.reference.atol = f.atol_opt->count() ? f.atol : config_value<double>(cfg, "atol", f.atol);
  out.mode = parse_closure_mode(f.mode_opt->count() ? f.mode : config_value<std::string>(cfg, "mode", f.mode));
  return out;
}

int cmd_basis(std::size_t n, unsigned degree, const std::string& format, bool counts_only) {
  if (format != "text" && format != "csv") throw UsageError("--format must be text or csv");
  const std::uint64_t sym = count_sym(n, degree);
  std::optional<std::uint64_t> tensor;
  if (n > 1) tensor = count_tensor(n, degree);
  const std::string tensor_s = tensor ? std::to_string(*tensor) : "n/a";

  if (counts_only) {
    if (format == "csv")
      std::cout << "n,Q,count_sym,count_tensor\n" << n << ',' << degree << ',' << sym << ',' << tensor_s << '\n';
    else
      std::cout << "count_sym    " << sym << "\ncount_tensor " << tensor_s << '\n';
    return kOk;
  }

  const MonomialBasis basis = generate_basis(n, degree);
  if (format == "csv") {
    std::cout << "column,degree,exponents,key\n";
    for (std::size_t c = 0; c < basis.size(); ++c) {
      std::string e;
      for (std::size_t j = 0; j < n; ++j) e += (j ? " " : "") + std::to_string(basis[c][j]);
      std::cout << c << ',' << basis[c].degree() << ',' << e << ',' << pack_key(basis[c], basis.bits()) << '\n';
    }
  } else {
    std::cout << "n = " << n << ", Q = " << degree << ", bits per component = " << basis.bits() << '\n';
    std::cout << "column  degree  exponents  key\n";
    for (std::size_t c = 0; c < basis.size(); ++c)
      std::cout << c << "  " << basis[c].degree() << "  " << basis[c].to_string() << "  "
                << pack_key(basis[c], basis.bits()) << '\n';
    std::cout << "size " << basis.size() << '\n';
  }
  std::cout << (format == "csv" ? "# count_sym," : "count_sym    ") << sym << '\n'
            << (format == "csv" ? "# count_tensor," : "count_tensor ") << tensor_s << '\n';
  return kOk;
}

int cmd_assemble(const ProblemFlags& flags, const std::string& center_s, unsigned lift_degree,
                 const std::string& out_dir) {
  const ResolvedProblem rp = resolve_problem(flags, load_config(flags.config_path));
  const Problem& pb = rp.problem;
  const Vector center = center_s.empty() ? pb.x_init : io::parse_vector(center_s);
  if (center.size() != pb.system.dimension()) throw UsageError("--center has the wrong length");
  if (lift_degree < pb.system.degree())
    throw UsageError("--Q must be at least the system degree P=" + std::to_string(pb.system.degree()));

  const LiftStructure structure = build_lift_structure(pb.system.dimension(), pb.system.degree(), lift_degree);
  const LiftedAffineSystem lifted = assemble_lifted(shift_operator(pb.system, center), structure, rp.mode);

  const fs::path dir(out_dir);
  io::write_file(dir / "a_zz.mtx", io::matrix_market(lifted.a_zz));
  io::write_file(dir / "b_z.csv", io::vector_csv(lifted.b_z));
  io::write_file(dir / "stats.json", io::stats_json(lifted.stats).dump(2) + '\n');
  std::cout << "n_Z " << lifted.a_zz.rows() << ", nnz " << lifted.a_zz.nnz() << ", stats "
            << io::stats_json(lifted.stats).dump() << '\n'
            << "wrote " << (dir / "a_zz.mtx").string() << ", b_z.csv, stats.json\n";
  return kOk;
}

int cmd_run(const ProblemFlags& flags, const std::string& method, std::size_t n_eval,
            std::optional<unsigned> lift_degree, bool no_report, const std::string& out_dir) {
  const ResolvedProblem rp = resolve_problem(flags, load_config(flags.config_path));
  const Problem& pb = rp.problem;
  if (n_eval < 2) throw UsageError("--n-eval must be at least 2");
  if (method != "jacobian" && method != "lifted" && method != "reference")
    throw UsageError("--method must be jacobian, lifted or reference");
  if (method == "lifted") {
    if (!lift_degree) throw UsageError("--Q is required for the lifted method");
    if (*lift_degree < pb.system.degree())
      throw UsageError("--Q=" + std::to_string(*lift_degree) + " is below the system degree P=" +
                       std::to_string(pb.system.degree()));
  }

  const std::size_t n_steps = n_eval - 1;
  const auto grid = uniform_grid(pb.span, n_steps);
  SweepCell cell{method, method == "lifted" ? *lift_degree : 0u, n_eval, {}, {}};
  const fs::path dir = out_dir.empty() ? fs::path("runs") / pb.name / cell.directory() : fs::path(out_dir);

  Trajectory traj;
  std::optional<LiftedAffineSystem> final_system;
  if (method == "reference") {
    traj = solve_reference(pb.system, pb.x_init, pb.span, rp.reference, grid);
  } else if (method == "jacobian") {
    traj = solve_jacobian_euler(pb.system, pb.x_init, pb.span, n_steps);
  } else {
    const LiftStructure structure = build_lift_structure(pb.system.dimension(), pb.system.degree(), *lift_degree);
    LiftedRun run = run_lifted_euler(pb.system, structure, pb.x_init, pb.span, n_steps, rp.mode);
    traj = std::move(run.trajectory);
    final_system = std::move(run.final_system);
  }

  std::optional<ErrorReport> report;
  if (method != "reference" && !no_report)
    report = max_error(traj, solve_reference(pb.system, pb.x_init, pb.span, rp.reference, grid));

  write_run_outputs(dir, traj, report ? &*report : nullptr, final_system ? &*final_system : nullptr);
  std::cout << "wrote " << (dir / "trajectory.csv").string() << '\n';
  if (report)
    std::cout << "max_error " << io::format_double(report->max_error) << ", frob_error "
              << io::format_double(report->frob_error) << '\n';
  return kOk;
}

int cmd_sweep(const ProblemFlags& flags, const std::vector<unsigned>& degrees_flag,
              const std::vector<std::size_t>& n_eval_flag, unsigned workers_flag, bool workers_given,
              const std::string& out_dir) {
  const json cfg = load_config(flags.config_path);
  const ResolvedProblem rp = resolve_problem(flags, cfg);

  SweepConfig sc;
  sc.problem = rp.problem;
  sc.reference = rp.reference;
  sc.mode = rp.mode;
  const bool demo1 = sc.problem.name == "demo1";
  sc.lift_degrees = demo1 ? std::vector<unsigned>{3, 4, 5} : std::vector<unsigned>{2, 3, 4};
  sc.n_eval = demo1 ? std::vector<std::size_t>{101, 201}
                    : std::vector<std::size_t>{11, 21, 51, 101, 201, 501, 1001, 2001, 5001, 10001};
  sc.lift_degrees = config_value(cfg, "degZ", sc.lift_degrees);
  sc.n_eval = config_value(cfg, "n_eval", sc.n_eval);
  sc.workers = config_value(cfg, "workers", 1u);
  if (!degrees_flag.empty()) sc.lift_degrees = degrees_flag;
  if (!n_eval_flag.empty()) sc.n_eval = n_eval_flag;
  if (workers_given) sc.workers = workers_flag;
  sc.output_dir = out_dir.empty() ? config_value<std::string>(cfg, "output", "runs/" + sc.problem.name) : out_dir;

  const SweepResult result = run_sweep(sc);
  std::cout << summary_csv(result);
  for (const auto& [label, slope] : result.slopes)
    std::cout << "# slope " << label << ' ' << (slope ? io::format_double(*slope) : "n/a") << '\n';
  std::size_t failed = 0;
  for (const auto& c : result.cells)
    if (!c.report) {
      ++failed;
      std::cerr << "FAILED " << c.directory() << ": " << c.failure << '\n';
    }
  std::cout << "# wrote " << (sc.output_dir / "summary.csv").string() << '\n';
  return failed == result.cells.size() && failed > 0 ? kNumerical : kOk;
}

int cmd_report(const std::string& run_dir, const std::vector<double>& tolerances, bool svg) {
  const fs::path dir(run_dir);
  const fs::path summary = dir / "summary.csv";
  if (!fs::exists(summary)) throw UsageError("no summary.csv in " + dir.string());
  const auto rows = parse_summary(io::read_file(summary));
  if (rows.empty()) throw UsageError(summary.string() + " has no rows");
  const std::string text = render_report(rows, tolerances);
  std::cout << text;
  io::write_file(dir / "report.txt", text);
  if (svg) {
    io::write_file(dir / "error_vs_steps.svg", render_svg(rows, dir.filename().string() + ": error vs steps"));
    std::cout << "# wrote " << (dir / "error_vs_steps.svg").string() << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duplicate-aware shift-and-lift Carleman linearization"};
  app.require_subcommand(1);

  auto* basis_cmd = app.add_subcommand("basis", "List a symmetry-reduced monomial basis and its counts");
  std::size_t basis_n = 0;
  unsigned basis_q = 0;
  std::string basis_format = "text";
  bool counts_only = false;
  basis_cmd->add_option("--n", basis_n, "State dimension")->required();
  basis_cmd->add_option("--Q", basis_q, "Maximum degree")->required();
  basis_cmd->add_option("--format", basis_format, "text or csv");
  basis_cmd->add_flag("--counts-only", counts_only, "Print only the two counting conventions");

  auto* assemble_cmd = app.add_subcommand("assemble", "Assemble (A_ZZ, b_Z) about a center");
  ProblemFlags assemble_flags;
  assemble_flags.attach(assemble_cmd);
  std::string center;
  unsigned assemble_q = 0;
  std::string assemble_out = ".";
  assemble_cmd->add_option("--center", center, "Expansion center, comma separated (default: x_init)");
  assemble_cmd->add_option("--Q", assemble_q, "Lift degree")->required();
  assemble_cmd->add_option("--out", assemble_out, "Output directory");

  auto* run_cmd = app.add_subcommand("run", "Integrate one problem with one method");
  ProblemFlags run_flags;
  run_flags.attach(run_cmd);
  std::string method = "lifted";
  std::size_t n_eval = 101;
  unsigned run_q = 0;
  bool no_report = false;
  std::string run_out;
  run_cmd->add_option("--method", method, "jacobian, lifted or reference");
  run_cmd->add_option("--n-eval", n_eval, "Number of grid samples (steps + 1)");
  auto* run_q_opt = run_cmd->add_option("--Q", run_q, "Lift degree (lifted method)");
  run_cmd->add_flag("--no-report", no_report, "Skip the reference co-run and report.json");
  run_cmd->add_option("--out", run_out, "Output directory (default runs/<problem>/<method>_Q<q>_N<n>)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the method x degree x grid sweep");
  ProblemFlags sweep_flags;
  sweep_flags.attach(sweep_cmd);
  std::vector<unsigned> sweep_q;
  std::vector<std::size_t> sweep_n;
  unsigned workers = 1;
  std::string sweep_out;
  sweep_cmd->add_option("--Q", sweep_q, "Lift degrees")->delimiter(',');
  sweep_cmd->add_option("--n-eval", sweep_n, "Grid sizes")->delimiter(',');
  auto* workers_opt = sweep_cmd->add_option("--workers", workers, "Concurrent cells");
  sweep_cmd->add_option("--out", sweep_out, "Output directory (default runs/<problem>)");

  auto* report_cmd = app.add_subcommand("report", "Summarize a sweep directory");
  std::string run_dir;
  std::vector<double> tolerances{1e-1, 1e-2, 1e-3, 1e-4};
  bool svg = false;
  report_cmd->add_option("--run-dir", run_dir, "Sweep output directory")->required();
  report_cmd->add_option("--tol", tolerances, "Error tolerances for dt_max and R(e)")->delimiter(',');
  report_cmd->add_flag("--svg", svg, "Also write error_vs_steps.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*basis_cmd) return cmd_basis(basis_n, basis_q, basis_format, counts_only);
    if (*assemble_cmd) return cmd_assemble(assemble_flags, center, assemble_q, assemble_out);
    if (*run_cmd)
      return cmd_run(run_flags, method, n_eval, run_q_opt->count() ? std::optional<unsigned>(run_q) : std::nullopt,
                     no_report, run_out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep_q, sweep_n, workers, workers_opt->count() > 0, sweep_out);
    if (*report_cmd) return cmd_report(run_dir, tolerances, svg);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
