#include "ipinn/runner.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace ipinn::runner {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void print_log(std::ostream& out, const LogEntry& e) {
  const LossBreakdown& l = e.loss;
  out << "epoch " << e.epoch << "  total " << io::format_double(l.total) << "  mse_g "
      << io::format_double(l.mse_g) << "  u_mm " << io::format_double(l.u_mm_min) << " / "
      << io::format_double(l.u_mm_max) << "  mse_0 " << io::format_double(l.mse_0) << "  mse_u "
      << io::format_double(l.mse_u);
  if (e.box_violations) out << "  box violations " << e.box_violations;
  out << '\n';
}

void write_bundle(const fs::path& dir, const ProblemDefinition& problem, const SolutionBundle& b) {
  io::write_solution_csv(dir / "solution.csv", problem, b.x, b.t, b.u, b.fields);
  io::write_log_csv(dir / "log.csv", b.history);
  io::write_params(dir / "params.json", b.epochs, b.solution_params, b.field_params);
}

RunReport run_crisp(const io::RunConfig& config, std::ostream* progress) {
  RunReport report;
  report.output = config.output;
  TrainingHooks hooks;
  if (progress) hooks.on_log = [progress](const LogEntry& e) { print_log(*progress, e); };
  if (config.training.snapshot_every > 0) {
    hooks.on_snapshot = [&](long epoch, const nn::NetworkParams& u, const nn::NetworkParams& p) {
      io::write_params(config.output / "snapshots" / ("params_" + std::to_string(epoch) + ".json"),
                       epoch, u, p);
    };
  }
  try {
    report.bundle = train(config.problem, config.training, hooks);
    write_bundle(config.output, config.problem, *report.bundle);
  } catch (const TrainingDiverged& e) {
    report.diverged = true;
    report.message = e.what();
    const CollocationGrids g = collocation_grids(config.problem, config.training);
    const Evaluation ev = evaluate_networks(config.problem, e.solution_params(), e.field_params(),
                                            g.interior_x, g.interior_t);
    SolutionBundle b;
    b.problem = config.problem.name;
    b.x = g.interior_x;
    b.t = g.interior_t;
    b.u = ev.u;
    b.fields = ev.fields;
    b.history = e.history();
    b.solution_params = e.solution_params();
    b.field_params = e.field_params();
    b.epochs = e.epoch();
    write_bundle(config.output, config.problem, b);
    report.bundle = std::move(b);
  }
  return report;
}

RunReport run_fuzzy(const io::RunConfig& config, std::ostream* progress) {
  RunReport report;
  report.output = config.output;
  FuzzySolution s = run_fpinn(*config.fuzzy, config.alpha_levels, config.training, config.jobs);
  std::ostringstream cuts;
  cuts << "alpha,seed,status,directory\n";
  for (const CutResult& c : s.cuts) {
    const std::string dir = cut_directory(c.alpha);
    if (c.bundle) {
      write_bundle(config.output / dir, config.fuzzy->at(c.alpha), *c.bundle);
    } else {
      report.diverged = true;
      report.message += (report.message.empty() ? "" : "; ") + ("alpha " +
                        io::format_double(c.alpha) + ": " + c.error);
    }
    cuts << io::format_double(c.alpha) << ',' << c.seed << ',' << (c.bundle ? "ok" : "diverged")
         << ',' << (c.bundle ? dir : "") << '\n';
    if (progress) {
      *progress << "alpha " << io::format_double(c.alpha) << ": "
                << (c.bundle ? "done" : c.error) << '\n';
    }
  }
  write_text(config.output / "cuts.csv", cuts.str());
  io::write_fuzzy_csv(config.output / "fuzzy.csv", config.problem, s);
  report.fuzzy = std::move(s);
  return report;
}

}  // namespace

std::string cut_directory(double alpha) { return "alpha_" + io::format_double(alpha); }

RunReport run_to_directory(const io::RunConfig& config, std::ostream* progress) {
  io::validate(config);
  fs::create_directories(config.output);
  write_text(config.output / "metadata.json", io::to_json(config, true));
  return config.is_fuzzy() ? run_fuzzy(config, progress) : run_crisp(config, progress);
}

// ---------------------------------------------------------------------------

BarReference bar_combinations(const ProblemDefinition& bar, int elements) {
  const oracle::FemMesh mesh = oracle::FemMesh::uniform(bar.space.upper, elements);
  const oracle::BarLoad load = oracle::bar_benchmark_load();
  BarReference r;
  r.x = mesh.nodes;
  for (const oracle::FieldPair& pair : oracle::endpoint_combinations(bar)) {
    r.names.push_back(pair.name);
    r.curves.push_back(oracle::fem_solve_bar(oracle::at_time_zero(pair.E),
                                             oracle::at_time_zero(pair.A), load.distributed,
                                             load.end_load, mesh));
  }
  r.lower = r.curves.front();
  r.upper = r.curves.front();
  for (const auto& c : r.curves) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      r.lower[i] = std::min(r.lower[i], c[i]);
      r.upper[i] = std::max(r.upper[i], c[i]);
    }
  }
  return r;
}

std::vector<double> bar_realized(const ProblemDefinition& bar, const nn::NetworkParams& field_params,
                                 Branch branch, const oracle::FemMesh& mesh) {
  const auto field = [&](int index) {
    return [&, index](double x) {
      Eigen::ArrayXd xs(1), ts = Eigen::ArrayXd::Zero(1);
      xs[0] = x;
      return realized_field(bar, field_params, index, branch, xs, ts)[0];
    };
  };
  const oracle::BarLoad load = oracle::bar_benchmark_load();
  return oracle::fem_solve_bar(field(0), field(1), load.distributed, load.end_load, mesh);
}

oracle::FdSolution pde_realized(const ProblemDefinition& pde, const nn::NetworkParams& field_params,
                                Branch branch, const oracle::FdGrid& grid) {
  const oracle::SpaceTimeField k = [&](const Eigen::ArrayXd& x, double t) -> Eigen::ArrayXd {
    return realized_field(pde, field_params, 0, branch, x, Eigen::ArrayXd::Constant(x.size(), t));
  };
  return oracle::fd_solve_nonlinear(k, grid);
}

void write_fd_csv(const fs::path& path, const oracle::FdSolution& solution,
                  const std::vector<double>& times) {
  std::vector<std::vector<double>> cols(3);
  for (double t : times) {
    std::size_t row = 0;
    for (std::size_t i = 1; i < solution.times.size(); ++i) {
      if (std::abs(solution.times[i] - t) < std::abs(solution.times[row] - t)) row = i;
    }
    for (Eigen::Index i = 0; i < solution.x.size(); ++i) {
      cols[0].push_back(solution.x[i]);
      cols[1].push_back(solution.times[row]);
      cols[2].push_back(solution.u(static_cast<Eigen::Index>(row), i));
    }
  }
  io::write_csv(path, {"x", "t", "u"}, cols);
}

}  // namespace ipinn::runner
