#pragma once

// Problem definitions: domain, interval input fields, residual operator,
// boundary and initial data. Residuals, boundary targets and initial values
// are expression strings over the point symbols
//
//   x, t                          coordinates
//   u, u_x, u_xx, u_t             primary field (h = 1)
//   u1, u1_x, ..., uh_t           primary fields (h > 1)
//   P1, P1_x, P1_t, ..., Ps_t     realized input fields of the branch
//   <name>, <name>_x, <name>_t    the same fields under their declared names
//
// so the built-in benchmarks and user problems from a config file go through
// the same code path.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ipinn/autodiff.hpp"
#include "ipinn/expression.hpp"
#include "ipinn/neural.hpp"
#include "ipinn/uncertainty.hpp"

namespace ipinn {

enum class Branch { Min, Max };

struct FieldSpec {
  std::string name;  // optional alias; P<i> always works
  IntervalField bounds;
};

enum class BoundaryKind { Value, Derivative };

/// u_c(location, t) = target  or  du_c/dx(location, t) = target, for every t
/// of the time grid. The target may use the branch's realized fields.
struct BoundaryCondition {
  double location = 0.0;
  BoundaryKind kind = BoundaryKind::Value;
  std::string target = "0";
  int component = 0;
};

/// u_c(x, t0) = value(x).
struct InitialCondition {
  std::string value;
  int component = 0;
};

/// Which input derivatives the expressions reference.
struct DerivativeNeeds {
  bool u_x = false;
  bool u_xx = false;
  bool u_t = false;
  bool field_x = false;
  bool field_t = false;
};

struct NetworkShape {
  int hidden_layers = 2;
  int width = 20;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Training settings reported for a benchmark; used as config defaults.
struct ProblemDefaults {
  NetworkShape solution_net;
  NetworkShape field_net;
  double learning_rate = 1e-3;
  long epochs = 10000;
  double w_g = 1.0;
  double w_mm = 1.0;
  double w_0 = 1.0;
  double w_u = 1.0;
  int space_points = 100;  // N_R
  int time_points = 1;     // N_t
};

struct ProblemDefinition {
  std::string name;
  Interval space{0.0, 1.0};
  std::optional<Interval> time;
  /// Feed the networks the constant 1.0 instead of coordinates.
  bool constant_input = false;
  int components = 1;
  std::vector<FieldSpec> fields;
  std::vector<std::string> residual;
  std::vector<BoundaryCondition> boundary;
  std::vector<InitialCondition> initial;
  ProblemDefaults defaults;

  int field_count() const { return static_cast<int>(fields.size()); }
  int residual_size() const { return static_cast<int>(residual.size()); }

  int input_width() const;
  nn::InputLayout input_layout() const;
  DerivativeNeeds needs() const;

  /// Parses every expression, checks bounds on a 512-point grid per axis,
  /// boundary locations and component indices. Throws ParseError,
  /// InvalidBoundsError or ContractError.
  void validate(int samples = 512) const;
};

/// Column layout of the per-point symbol table: x, t, then per component
/// (u, u_x, u_xx, u_t), then per field (P, P_x, P_t).
class SymbolLayout {
 public:
  SymbolLayout(int components, int fields) : components_(components), fields_(fields) {}

  int size() const { return 2 + 4 * components_ + 3 * fields_; }
  static int x() { return 0; }
  static int t() { return 1; }
  int u(int c) const { return 2 + 4 * c; }
  int u_x(int c) const { return u(c) + 1; }
  int u_xx(int c) const { return u(c) + 2; }
  int u_t(int c) const { return u(c) + 3; }
  int field(int i) const { return 2 + 4 * components_ + 3 * i; }
  int field_x(int i) const { return field(i) + 1; }
  int field_t(int i) const { return field(i) + 2; }
  int components() const { return components_; }
  int fields() const { return fields_; }

 private:
  int components_;
  int fields_;
};

/// Creates one graph variable per layout slot, in slot order, and returns
/// the symbol table (with field-name aliases) for the problem.
SymbolTable point_symbols(const ProblemDefinition& problem, ad::Graph& graph);

/// One branch's solution and field values at a point. Derivatives may be
/// absent; residual() rejects a state that lacks one the problem needs.
struct BranchState {
  Branch branch = Branch::Min;
  std::vector<double> u;
  std::vector<std::optional<double>> u_x, u_xx, u_t;
  std::vector<double> fields;
  std::vector<std::optional<double>> fields_x, fields_t;
};

/// Residual vector G(x, t, u, P) for one branch.
std::vector<double> residual(const ProblemDefinition& problem, const BranchState& state, double x,
                             double t = 0.0);

/// Residual as graph nodes over point_symbols().
std::vector<ad::Expr> residual_nodes(const ProblemDefinition& problem, ad::Graph& graph,
                                     const SymbolTable& symbols);

/// Sum of squares of a list of expressions over the point symbols, compiled
/// once and evaluated over many lanes (points x branches) per call.
class SquaredTerms {
 public:
  SquaredTerms(const ProblemDefinition& problem, const std::vector<std::string>& expressions,
               std::string label);

  const SymbolLayout& layout() const { return layout_; }
  /// Whether the expressions read the given layout slot.
  bool uses(int slot) const { return uses_[static_cast<std::size_t>(slot)]; }

  /// `inputs` is lanes x layout().size(); returns the per-lane sum of squares.
  /// A non-finite value is reported with the label and the lane's (x, t).
  const Eigen::ArrayXd& forward(const Eigen::ArrayXXd& inputs);
  /// Per-lane expression values from the last forward().
  Eigen::ArrayXd value(std::size_t k) const;
  /// Adjoints of the symbols (lanes x layout().size()) for the lane-wise
  /// seed on the sum of squares of the last forward().
  const Eigen::ArrayXXd& backward(const Eigen::ArrayXd& seed);

 private:
  SymbolLayout layout_;
  std::string label_;
  std::unique_ptr<ad::Graph> graph_;
  std::vector<ad::Expr> terms_;
  ad::Expr total_;
  std::vector<bool> uses_;
  std::unique_ptr<ad::BatchEvaluator> eval_;
  Eigen::ArrayXXd inputs_;
  Eigen::ArrayXd sums_;
  Eigen::ArrayXXd adjoints_;
};

// ---------------------------------------------------------------------------
// Built-in benchmarks

ProblemDefinition builtin_toy_interval();
ProblemDefinition builtin_bar_1d();
ProblemDefinition builtin_nonlinear_pde();

/// Problem whose input fields are fuzzy; each alpha-cut is an interval
/// problem.
struct FuzzyProblem {
  ProblemDefinition base;
  std::vector<FuzzyField> fields;  // one per base field
  std::vector<double> levels;

  ProblemDefinition at(double alpha) const;
};

FuzzyProblem builtin_toy_fuzzy();

/// Names accepted by builtin_problem() / builtin_fuzzy_problem().
std::vector<std::string> builtin_names();
bool is_fuzzy_builtin(const std::string& name);
/// Throws ConfigError for unknown names.
ProblemDefinition builtin_problem(const std::string& name);
FuzzyProblem builtin_fuzzy_problem(const std::string& name);

}  // namespace ipinn
