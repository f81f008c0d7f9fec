#pragma once

// fPINN: one independently trained iPINN per alpha-cut, assembled into a
// piecewise-linear output membership.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ipinn/problem.hpp"
#include "ipinn/training.hpp"

namespace ipinn {

/// Strictly increasing levels in [0, 1]. Throws ConfigError otherwise.
void validate_schedule(const std::vector<double>& levels);

/// Seed of the cut at `index`, derived from the base seed.
std::uint64_t cut_seed(std::uint64_t base, std::size_t index);

struct CutResult {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::optional<SolutionBundle> bundle;  // empty when training failed
  std::string error;
};

struct FuzzySolution {
  std::string problem;
  std::vector<CutResult> cuts;  // ascending alpha

  bool complete() const;
  /// Output interval of component `c` at interior point `point` for every
  /// successful cut: rows (alpha, lower, upper).
  std::vector<std::array<double, 3>> intervals(Eigen::Index point = 0, int component = 0) const;
};

/// Trains every cut of `schedule`, `jobs` at a time. Divergence of one cut
/// is recorded in its CutResult and does not stop the others.
FuzzySolution run_fpinn(const FuzzyProblem& problem, const std::vector<double>& schedule,
                        const TrainingConfig& config, int jobs = 1);

/// Piecewise-linear membership through cut endpoints.
struct Membership {
  std::vector<double> alpha;
  std::vector<double> lower;  // left endpoints, by ascending alpha
  std::vector<double> upper;
  bool nested = true;
  std::vector<std::string> warnings;

  /// Membership grade of y (0 outside the lowest cut).
  double operator()(double y) const;
};

/// Needs at least two cuts. Cuts that are not nested beyond `tolerance`
/// are flagged in `warnings`.
Membership assemble_membership(const std::vector<std::array<double, 3>>& intervals,
                               double tolerance = 0.02);

}  // namespace ipinn
