#pragma once

// Self-checks behind `ipinn check` and the acceptance binary: autodiff
// against central differences on random expression graphs, and the FEM
// manufactured-solution convergence study.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ipinn::checks {

struct CheckResult {
  std::string suite;
  int cases = 0;
  double max_error = 0.0;
  double threshold = 0.0;        // pass below this (or inside [floor, threshold])
  std::optional<double> floor{};
  double seconds = 0.0;
  int rejected = 0;  // random draws skipped as unresolvable by differences
  bool pass = false;
};

/// |a - b| / max(|a|, |b|, 1).
double relative_error(double a, double b);

struct AutodiffOptions {
  int graphs = 100;
  std::uint64_t seed = 1;
  /// Test fixture: scales every analytic derivative by (1 + 1e-3), as a
  /// wrong derivative rule would.
  bool inject_gradient_bug = false;
};

/// Inputs drawn from [-2, 2]. First derivatives (reverse mode, step 1e-5)
/// against 1e-6; second derivatives (d2/dx2 and the mixed d/dt d/dx,
/// Richardson-extrapolated from steps 1e-3 and 5e-4) against 1e-5.
std::vector<CheckResult> autodiff_suite(const AutodiffOptions& options = {});

/// Max nodal error ratio between 100 and 200 elements for u = sin(pi x / 4)
/// on [0, 2]; passes inside [3.2, 4.8]. `max_error` holds the ratio.
CheckResult fem_convergence();

}  // namespace ipinn::checks
