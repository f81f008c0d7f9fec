// ipinn: train interval/fuzzy PINNs, run reference solvers, self-check.
//
// Exit codes: 0 success, 1 other failure, 2 config error, 3 divergence,
// 4 check failure.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "ipinn/checks.hpp"
#include "ipinn/io.hpp"
#include "ipinn/runner.hpp"
#include "ipinn/uncertainty.hpp"

using namespace ipinn;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kDiverged = 3;
constexpr int kCheckFailed = 4;

struct RunArgs {
  std::string config_path;
  std::string problem;
  std::optional<long> epochs;
  std::optional<double> lr, wg, wmm, w0, wu;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<long> log_every, snapshot_every;
  std::optional<std::string> out;
  bool quiet = false;
};

io::RunConfig resolve(const RunArgs& a) {
  if (a.config_path.empty() == a.problem.empty()) {
    throw ConfigError("give either a config file or --problem");
  }
  io::RunConfig c = a.config_path.empty() ? io::default_run_config(a.problem)
                                          : io::load_run_config(a.config_path);
  TrainingConfig& t = c.training;
  if (a.epochs) t.epochs = *a.epochs;
  if (a.lr) t.learning_rate = *a.lr;
  if (a.wg) t.w_g = *a.wg;
  if (a.wmm) t.w_mm = *a.wmm;
  if (a.w0) t.w_0 = *a.w0;
  if (a.wu) t.w_u = *a.wu;
  if (a.seed) t.seed = *a.seed;
  if (a.log_every) t.log_every = *a.log_every;
  if (a.snapshot_every) t.snapshot_every = *a.snapshot_every;
  if (a.jobs) c.jobs = *a.jobs;
  if (a.out) c.output = *a.out;
  io::validate(c);
  return c;
}

int cmd_run(const RunArgs& args) {
  const io::RunConfig config = resolve(args);
  std::cerr << "ipinn run " << config.problem_name << " -> " << config.output.string() << '\n';
  const runner::RunReport r = runner::run_to_directory(config, args.quiet ? nullptr : &std::cerr);
  if (r.diverged) {
    std::cerr << "error: " << r.message << "\npartial artifacts in " << r.output.string() << '\n';
    return kDiverged;
  }
  if (r.bundle) {
    const SolutionBundle& b = *r.bundle;
    std::cout << "epochs " << b.epochs << ", box violations " << b.box_violations << '\n';
    if (b.x.size() == 1) {
      std::cout << "u in [" << io::format_double(b.u(0, 0)) << ", "
                << io::format_double(b.u(1, 0)) << "]\n";
    }
  }
  if (r.fuzzy && r.fuzzy->cuts.front().bundle && r.fuzzy->cuts.front().bundle->x.size() == 1) {
    for (const auto& row : r.fuzzy->intervals()) {
      std::cout << "alpha " << io::format_double(row[0]) << ": [" << io::format_double(row[1])
                << ", " << io::format_double(row[2]) << "]\n";
    }
  }
  std::cout << "artifacts in " << r.output.string() << '\n';
  return 0;
}

struct OracleArgs {
  std::string problem;
  bool combinations = false;
  std::string k = "both";
  std::string from_run;
  int elements = 200;
  int nodes = 201;
  int resolution = 15001;
  std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::string out = "oracle";
  int jobs = 1;
};

int cmd_oracle(const OracleArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);
  if (a.problem == "bar-1d") {
    const ProblemDefinition bar = builtin_bar_1d();
    const runner::BarReference ref = runner::bar_combinations(bar, a.elements);
    std::vector<std::string> header{"x", "t"};
    std::vector<std::vector<double>> cols{ref.x, std::vector<double>(ref.x.size(), 0.0)};
    for (std::size_t i = 0; i < ref.names.size(); ++i) {
      header.push_back(ref.names[i]);
      cols.push_back(ref.curves[i]);
    }
    header.insert(header.end(), {"u_min", "u_max"});
    cols.push_back(ref.lower);
    cols.push_back(ref.upper);
    io::write_csv(out / "bar_combinations.csv", header, cols);
    std::cout << "wrote " << (out / "bar_combinations.csv").string() << " (" << ref.names.size()
              << " curves)\n";
    if (!a.from_run.empty()) {
      const io::ParamsFile p = io::read_params(fs::path(a.from_run) / "params.json");
      const oracle::FemMesh mesh = oracle::FemMesh::uniform(bar.space.upper, a.elements);
      const auto lo = runner::bar_realized(bar, p.field, Branch::Min, mesh);
      const auto hi = runner::bar_realized(bar, p.field, Branch::Max, mesh);
      io::write_csv(out / "bar_realized.csv", {"x", "t", "u_min", "u_max"},
                    {mesh.nodes, std::vector<double>(mesh.nodes.size(), 0.0), lo, hi});
      std::cout << "wrote " << (out / "bar_realized.csv").string() << '\n';
    }
    return 0;
  }
  if (a.problem == "toy-interval") {
    const oracle::Extrema e = oracle::grid_search_extrema(
        [](double x) { return x * (2 - x); }, Interval{0.5, 2.0}, a.resolution);
    io::write_csv(out / "toy_interval.csv", {"x", "t", "u_min", "u_max", "P1_min", "P1_max"},
                  {{1.0}, {0.0}, {e.min}, {e.max}, {e.argmin}, {e.argmax}});
    std::cout << "min " << io::format_double(e.min) << " at " << io::format_double(e.argmin)
              << ", max " << io::format_double(e.max) << " at " << io::format_double(e.argmax)
              << '\n';
    return 0;
  }
  if (a.problem == "toy-fuzzy") {
    const FuzzyProblem fz = builtin_toy_fuzzy();
    const FuzzyNumber n = FuzzyNumber::triangular(0.5, 1.0, 2.0);
    const auto results = alpha_level_optimize(
        [](std::span<const double> x) { return x[0] * (2 - x[0]); }, std::span(&n, 1), fz.levels,
        a.resolution);
    std::vector<std::vector<double>> cols(3);
    for (const AlphaLevelResult& r : results) {
      cols[0].push_back(r.alpha);
      cols[1].push_back(r.output.lower);
      cols[2].push_back(r.output.upper);
      std::cout << "alpha " << io::format_double(r.alpha) << ": ["
                << io::format_double(r.output.lower) << ", " << io::format_double(r.output.upper)
                << "]\n";
    }
    io::write_csv(out / "toy_fuzzy.csv", {"alpha", "lower", "upper"}, cols);
    return 0;
  }
  if (a.problem == "nonlinear-pde") {
    const ProblemDefinition pde = builtin_nonlinear_pde();
    const oracle::FdGrid grid = oracle::FdGrid::make(a.nodes);
    struct Job {
      std::string name;
      oracle::SpaceTimeField k;
      std::optional<oracle::FdSolution> result;
      std::string error;
    };
    std::vector<Job> jobs;
    if (a.k == "lower" || a.k == "both") {
      jobs.push_back({"fd_k_lower.csv", oracle::from_field(pde.fields[0].bounds.lower()), {}, {}});
    }
    if (a.k == "upper" || a.k == "both") {
      jobs.push_back({"fd_k_upper.csv", oracle::from_field(pde.fields[0].bounds.upper()), {}, {}});
    }
    std::optional<io::ParamsFile> params;
    if (!a.from_run.empty()) {
      params = io::read_params(fs::path(a.from_run) / "params.json");
      for (Branch b : {Branch::Min, Branch::Max}) {
        const nn::NetworkParams& p = params->field;
        jobs.push_back({b == Branch::Min ? "fd_k_realized_min.csv" : "fd_k_realized_max.csv",
                        [&pde, &p, b](const Eigen::ArrayXd& x, double t) -> Eigen::ArrayXd {
                          return realized_field(pde, p, 0, b, x,
                                                Eigen::ArrayXd::Constant(x.size(), t));
                        },
                        {},
                        {}});
      }
    }
    auto solve = [&](Job& j) {
      try {
        j.result = oracle::fd_solve_nonlinear(j.k, grid);
      } catch (const Error& e) {
        j.error = e.what();
      }
    };
    {
      std::vector<std::jthread> pool;
      const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(a.jobs, jobs.size()));
      std::atomic<std::size_t> next{0};
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < jobs.size(); i = next++) solve(jobs[i]);
        });
      }
    }
    int status = 0;
    for (const Job& j : jobs) {
      if (!j.result) {
        std::cerr << "error: " << j.name << ": " << j.error << '\n';
        status = 1;
        continue;
      }
      runner::write_fd_csv(out / j.name, *j.result, a.times);
      std::cout << "wrote " << (out / j.name).string() << '\n';
    }
    return status;
  }
  throw ConfigError("no oracle for problem '" + a.problem +
                    "' (bar-1d, toy-interval, toy-fuzzy, nonlinear-pde)");
}

struct CheckArgs {
  int graphs = 100;
  std::uint64_t seed = 1;
  bool inject = false;
};

int cmd_check(const CheckArgs& a) {
  checks::AutodiffOptions o;
  o.graphs = a.graphs;
  o.seed = a.seed;
  o.inject_gradient_bug = a.inject;
  std::vector<checks::CheckResult> results = checks::autodiff_suite(o);
  results.push_back(checks::fem_convergence());
  bool ok = true;
  std::cout << std::left << std::setw(32) << "suite" << std::setw(8) << "cases" << std::setw(14)
            << "max error" << std::setw(12) << "pass if" << std::setw(10) << "seconds"
            << "result\n";
  for (const checks::CheckResult& r : results) {
    std::cout << std::setw(32) << r.suite << std::setw(8) << r.cases << std::setw(14)
              << std::setprecision(4) << r.max_error << std::setw(12)
              << (r.floor ? "[" + io::format_double(*r.floor) + ", " + io::format_double(r.threshold) + "]"
                          : "< " + io::format_double(r.threshold))
              << std::setw(10) << std::setprecision(3) << r.seconds << (r.pass ? "PASS" : "FAIL")
              << '\n';
    ok = ok && r.pass;
  }
  if (results.front().rejected) {
    std::cout << "(" << results.front().rejected
              << " random graphs redrawn: finite differences unresolved)\n";
  }
  return ok ? 0 : kCheckFailed;
}

int cmd_list() {
  for (const std::string& name : builtin_names()) {
    const bool fuzzy = is_fuzzy_builtin(name);
    const ProblemDefinition p = fuzzy ? builtin_fuzzy_problem(name).base : builtin_problem(name);
    const ProblemDefaults& d = p.defaults;
    std::cout << name << (fuzzy ? " (fuzzy)" : "") << "\n  residual: ";
    for (const auto& r : p.residual) std::cout << r << "  ";
    std::cout << "\n  space [" << p.space.lower << ", " << p.space.upper << "]";
    if (p.time) std::cout << ", time [" << p.time->lower << ", " << p.time->upper << "]";
    std::cout << ", fields:";
    for (std::size_t i = 0; i < p.fields.size(); ++i) {
      std::cout << " P" << i + 1 << (p.fields[i].name.empty() ? "" : "=" + p.fields[i].name);
    }
    std::cout << "\n  defaults: N_u " << d.solution_net.hidden_layers << "x" << d.solution_net.width
              << ", N_P " << d.field_net.hidden_layers << "x" << d.field_net.width << ", lr "
              << d.learning_rate << ", epochs " << d.epochs << ", W_G " << d.w_g << ", W_mm "
              << d.w_mm << ", W_0 " << d.w_0 << ", W_u " << d.w_u << ", grid " << d.space_points
              << "x" << d.time_points << "\n";
  }
  return 0;
}

struct ExportArgs {
  std::string run_dir;
  std::optional<double> alpha;
  int points = 401;
  int times = 11;
  std::string out;
};

int cmd_export(const ExportArgs& a) {
  const fs::path dir(a.run_dir);
  const io::RunConfig config = io::load_run_config(dir / "metadata.json");
  ProblemDefinition problem = config.problem;
  fs::path params_dir = dir;
  if (config.is_fuzzy()) {
    if (!a.alpha) throw ConfigError("fuzzy run: choose a cut with --alpha");
    problem = config.fuzzy->at(*a.alpha);
    params_dir = dir / runner::cut_directory(*a.alpha);
  }
  const io::ParamsFile p = io::read_params(params_dir / "params.json");
  const auto xs = problem.constant_input ? std::vector<double>{problem.space.lower}
                                         : linspace(problem.space, a.points);
  const auto ts = problem.time ? linspace(*problem.time, a.times) : std::vector<double>{0.0};
  Eigen::ArrayXd x(static_cast<Eigen::Index>(xs.size() * ts.size()));
  Eigen::ArrayXd t(x.size());
  Eigen::Index k = 0;
  for (double tv : ts) {
    for (double xv : xs) {
      x[k] = xv;
      t[k++] = tv;
    }
  }
  const Evaluation ev = evaluate_networks(problem, p.solution, p.field, x, t);
  const fs::path out = a.out.empty() ? params_dir / "export.csv" : fs::path(a.out);
  io::write_solution_csv(out, problem, x, t, ev.u, ev.fields);
  std::cout << "wrote " << out.string() << " (" << x.size() << " points)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval and fuzzy physics-informed neural networks"};
  app.require_subcommand(1);

  RunArgs run;
  CLI::App* run_cmd = app.add_subcommand("run", "Train a benchmark or a configured problem");
  run_cmd->add_option("config", run.config_path, "JSON run config")->check(CLI::ExistingFile);
  run_cmd->add_option("--problem", run.problem, "Built-in problem (see list-problems)");
  run_cmd->add_option("--epochs", run.epochs, "Training epochs");
  run_cmd->add_option("--lr", run.lr, "Adam learning rate");
  run_cmd->add_option("--wg", run.wg, "Residual loss weight W_G");
  run_cmd->add_option("--wmm", run.wmm, "Bound-spread weight W_mm");
  run_cmd->add_option("--w0", run.w0, "Initial-condition weight W_0");
  run_cmd->add_option("--wu", run.wu, "Boundary-condition weight W_u");
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--jobs", run.jobs, "Parallel alpha-cut trainings");
  run_cmd->add_option("--log-every", run.log_every, "Epochs between log entries");
  run_cmd->add_option("--snapshot-every", run.snapshot_every, "Epochs between parameter snapshots");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_flag("--quiet", run.quiet, "No per-epoch progress");

  OracleArgs oracle_args;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "Reference solutions as CSV");
  oracle_cmd->add_option("problem", oracle_args.problem, "Built-in problem")->required();
  oracle_cmd->add_flag("--combinations", oracle_args.combinations,
                       "bar-1d: FEM for the four endpoint combinations (always written)");
  oracle_cmd->add_option("--k", oracle_args.k, "nonlinear-pde: k bound to use")
      ->check(CLI::IsMember({"lower", "upper", "both"}));
  oracle_cmd->add_option("--from-run", oracle_args.from_run,
                         "Also re-solve with the fields realized by this run");
  oracle_cmd->add_option("--elements", oracle_args.elements, "FEM elements")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--nodes", oracle_args.nodes, "FD nodes")->check(CLI::Range(3, 100000));
  oracle_cmd->add_option("--resolution", oracle_args.resolution, "Grid-search points")
      ->check(CLI::Range(2, 100000000));
  oracle_cmd->add_option("--times", oracle_args.times, "FD output times");
  oracle_cmd->add_option("--out", oracle_args.out, "Output directory");
  oracle_cmd->add_option("--jobs", oracle_args.jobs, "Parallel FD solves")->check(CLI::PositiveNumber);

  CheckArgs check_args;
  CLI::App* check_cmd = app.add_subcommand("check", "Autodiff and FEM self-checks");
  check_cmd->add_option("--graphs", check_args.graphs, "Random graphs")->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", check_args.seed, "Graph generator seed");
  check_cmd->add_flag("--inject-gradient-bug", check_args.inject,
                      "Perturb analytic derivatives (the check must fail)");

  CLI::App* list_cmd = app.add_subcommand("list-problems", "Built-in problems and their defaults");

  ExportArgs export_args;
  CLI::App* export_cmd = app.add_subcommand("export", "Evaluate a trained run on a dense grid");
  export_cmd->add_option("run_dir", export_args.run_dir, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  export_cmd->add_option("--alpha", export_args.alpha, "Cut of a fuzzy run");
  export_cmd->add_option("--points", export_args.points, "Points in space")->check(CLI::Range(2, 10000000));
  export_cmd->add_option("--times", export_args.times, "Points in time")->check(CLI::Range(1, 100000));
  export_cmd->add_option("--out", export_args.out, "CSV path (default <run>/export.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*oracle_cmd) return cmd_oracle(oracle_args);
    if (*check_cmd) return cmd_check(check_args);
    if (*list_cmd) return cmd_list();
    if (*export_cmd) return cmd_export(export_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidBoundsError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
