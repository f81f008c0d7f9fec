#pragma once

// Run configuration files and run artifacts (CSV tables, parameter
// snapshots, metadata).
//
// Config schema (JSON; every key optional except "problem"):
//
//   {
//     "problem": "bar-1d" | { inline problem, see below },
//     "training": { "epochs", "learning_rate", "w_g", "w_mm", "w_0", "w_u",
//                   "space_points", "time_points", "seed", "log_every",
//                   "snapshot_every", "normalize_umm" },
//     "networks": { "solution": {"hidden_layers", "width"},
//                   "field":    {"hidden_layers", "width"} },
//     "alpha_levels": [0, 0.25, ...],      fuzzy problems only
//     "output": "runs/bar-1d",
//     "jobs": 1,
//     "provenance": { ... }                 written by `run`, ignored on read
//   }
//
// Inline problem:
//
//   { "name", "space": [a, b], "time": [a, b], "constant_input": false,
//     "components": 1,
//     "fields": [ {"name": "E", "lower": "0.5*sin(x) + 0.55", "upper": "2"},
//                 {"name": "k", "fuzzy": {"kind": "triangular",
//                                         "parameters": [0.5, 1, 2]}} ],
//     "residual": ["..."],
//     "boundary": [ {"x": 0, "kind": "value" | "derivative", "target": "0",
//                    "component": 0} ],
//     "initial": [ {"value": "1 - x^2", "component": 0} ] }
//
// Either all fields are fuzzy (an fPINN run over "alpha_levels") or none.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipinn/fuzzy.hpp"
#include "ipinn/problem.hpp"
#include "ipinn/training.hpp"

namespace ipinn::io {

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// Writes `header` and rows of equal length. Throws Error on I/O failure.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Header x,t,u_min,u_max,P1_min,P1_max,... (u1_min,u1_max,u2_min,... for
/// several components). One row per interior point.
std::vector<std::string> solution_header(const ProblemDefinition& problem);
void write_solution_csv(const std::filesystem::path& path, const ProblemDefinition& problem,
                        const Eigen::ArrayXd& x, const Eigen::ArrayXd& t,
                        const Eigen::MatrixXd& u, const Eigen::MatrixXd& fields);

/// Header epoch,total,mse_g,u_mm_min,u_mm_max,mse_0,mse_u,box_violations.
void write_log_csv(const std::filesystem::path& path, const std::vector<LogEntry>& history);

/// Output intervals per cut. A single-point, single-component problem gets
/// alpha,lower,upper; otherwise x,t,component,alpha,lower,upper.
void write_fuzzy_csv(const std::filesystem::path& path, const ProblemDefinition& problem,
                     const FuzzySolution& solution);

/// Both networks' layer specs and flat parameter vectors.
void write_params(const std::filesystem::path& path, long epoch, const nn::NetworkParams& u,
                  const nn::NetworkParams& p);
struct ParamsFile {
  long epoch = 0;
  nn::NetworkParams solution;
  nn::NetworkParams field;
};
ParamsFile read_params(const std::filesystem::path& path);

struct RunConfig {
  std::string problem_name;
  /// Inline problem as given, kept verbatim for the metadata file.
  std::optional<std::string> inline_problem;
  ProblemDefinition problem;
  std::optional<FuzzyProblem> fuzzy;  // set for fuzzy problems
  TrainingConfig training;
  std::vector<double> alpha_levels;   // fuzzy problems only
  std::filesystem::path output;
  int jobs = 1;

  bool is_fuzzy() const { return fuzzy.has_value(); }
};

/// Paper defaults of a built-in problem; output defaults to runs/<name>.
RunConfig default_run_config(const std::string& problem);

/// Parses and validates a config. Diagnostics name the source, the JSON
/// path of the offending key and its line:column. Throws ConfigError,
/// and ParseError or InvalidBoundsError from problem validation.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Re-validates after overrides (counts, weights, schedule).
void validate(const RunConfig& config);

/// Fully resolved config. With provenance, it becomes the metadata.json
/// content; it parses back to the same config either way.
std::string to_json(const RunConfig& config, bool with_provenance = false);

}  // namespace ipinn::io
