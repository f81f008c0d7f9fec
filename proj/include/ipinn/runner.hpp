#pragma once

// Whole runs and oracle sweeps, written to disk as CSV artifacts. The CLI,
// the acceptance runner and the Python module share these.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ipinn/fuzzy.hpp"
#include "ipinn/io.hpp"
#include "ipinn/oracle.hpp"
#include "ipinn/training.hpp"

namespace ipinn::runner {

struct RunReport {
  bool diverged = false;
  std::string message;
  std::filesystem::path output;
  std::optional<SolutionBundle> bundle;  // crisp runs
  std::optional<FuzzySolution> fuzzy;    // fuzzy runs
};

/// Trains per `config` and writes into config.output:
///   metadata.json  resolved config plus provenance
///   solution.csv, log.csv, params.json, snapshots/params_<epoch>.json
/// Fuzzy runs write fuzzy.csv, cuts.csv and one alpha_<a>/ directory per cut.
/// On divergence the artifacts of the last finite state are still written
/// and the report says diverged. Progress lines go to `progress` if given.
RunReport run_to_directory(const io::RunConfig& config, std::ostream* progress = nullptr);

/// Directory name of a cut, e.g. alpha_0.25.
std::string cut_directory(double alpha);

// ---------------------------------------------------------------------------
// Oracles with realized fields

struct BarReference {
  std::vector<double> x;
  std::vector<std::vector<double>> curves;  // one per endpoint combination
  std::vector<std::string> names;
  std::vector<double> lower, upper;         // pointwise envelope
};

/// FEM solutions of the four endpoint combinations on `elements` elements.
BarReference bar_combinations(const ProblemDefinition& bar, int elements = 200);

/// FEM re-solve with the fields realized by N_P on one branch.
std::vector<double> bar_realized(const ProblemDefinition& bar, const nn::NetworkParams& field_params,
                                 Branch branch, const oracle::FemMesh& mesh);

/// FD solution with k realized by N_P on one branch.
oracle::FdSolution pde_realized(const ProblemDefinition& pde, const nn::NetworkParams& field_params,
                                Branch branch, const oracle::FdGrid& grid);

/// The solution at the stored times nearest each of `times`, header x,t,u.
void write_fd_csv(const std::filesystem::path& path, const oracle::FdSolution& solution,
                  const std::vector<double>& times);

}  // namespace ipinn::runner
