#pragma once

// Reference solvers: linear FEM for the bar, method-of-lines finite
// differences for the nonlinear PDE, and grid search for scalar problems.
// All functions are pure and safe to call concurrently.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ipinn/expression.hpp"
#include "ipinn/problem.hpp"
#include "ipinn/uncertainty.hpp"

namespace ipinn::oracle {

using Function1 = std::function<double(double)>;

struct FemMesh {
  std::vector<double> nodes;

  /// `elements` equal elements on [0, length].
  static FemMesh uniform(double length, int elements);
  /// Throws ContractError unless nodes are strictly increasing from 0.
  void validate() const;
  int elements() const { return static_cast<int>(nodes.size()) - 1; }
};

enum class Quadrature { Midpoint, Gauss2 };

/// Solves (E A u')' + n = 0 on [0, L], u(0) = 0, E A u'(L) = end_load with
/// linear elements. Returns nodal displacements. Throws ContractError where
/// E A <= 0 at a quadrature point.
std::vector<double> fem_solve_bar(const Function1& E, const Function1& A, const Function1& load,
                                  double end_load, const FemMesh& mesh,
                                  Quadrature rule = Quadrature::Midpoint);

/// Distributed load and end load of the bar benchmark.
struct BarLoad {
  Function1 distributed;
  double end_load = 0.0;
};
BarLoad bar_benchmark_load();

struct FieldPair {
  std::string name;  // e.g. "E^L-A^U"
  FieldFunction E;
  FieldFunction A;
};

/// (E^L, A^L), (E^U, A^L), (E^L, A^U), (E^U, A^U). Requires two fields.
std::vector<FieldPair> endpoint_combinations(const ProblemDefinition& problem);

/// Adapts a field function to the one-argument form the FEM solver takes.
Function1 at_time_zero(const FieldFunction& f);

// ---------------------------------------------------------------------------

struct FdGrid {
  std::vector<double> nodes;
  double dt = 0.0;
  double end_time = 1.0;
  /// Diffusion coefficient estimate 0.01 * u_max used in the stability check.
  double u_max_estimate = 4.0;

  /// `count` equispaced nodes on [-1, 1], dt = 0.4 dx^2 / (0.01 u_max_estimate).
  static FdGrid make(int count = 201, double end_time = 1.0, double u_max_estimate = 4.0);
  /// Same nodes with an explicit step. Throws ContractError when unstable.
  static FdGrid with_step(int count, double dt, double end_time, double u_max_estimate = 4.0);

  double dx() const { return nodes[1] - nodes[0]; }
  long steps() const;
  /// Throws ContractError when 0.01 u_max dt / dx^2 > 0.5.
  void check_stability() const;
};

/// k(x nodes, t) -> k values at the nodes.
using SpaceTimeField = std::function<Eigen::ArrayXd(const Eigen::ArrayXd& x, double t)>;

SpaceTimeField from_field(const FieldFunction& f);

struct FdSolution {
  Eigen::ArrayXd x;
  std::vector<double> times;  // every step, starting at 0
  Eigen::MatrixXd u;          // times x nodes

  /// Row whose time is nearest to t.
  Eigen::ArrayXd at(double t) const;
};

/// u_t = 0.01 u u_xx - k u^3 + k^3 on [-1, 1], u(+-1, t) = 0, u(x, 0) = 1 - x^2,
/// central differences and classical RK4. Throws NonFiniteError naming the
/// time when |u| exceeds 1e6.
FdSolution fd_solve_nonlinear(const SpaceTimeField& k, const FdGrid& grid);

/// Right-hand side of the semi-discrete system at one state; exposed for tests.
Eigen::ArrayXd fd_rhs(const Eigen::ArrayXd& u, const Eigen::ArrayXd& k, double dx);

// ---------------------------------------------------------------------------

struct Extrema {
  double min = 0.0;
  double argmin = 0.0;
  double max = 0.0;
  double argmax = 0.0;
};

/// Brute-force extrema over `resolution` equispaced points; ties keep the
/// first point. Throws ContractError when resolution < 2.
Extrema grid_search_extrema(const Function1& f, Interval range, int resolution);

}  // namespace ipinn::oracle
