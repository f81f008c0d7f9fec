#pragma once

// Scalar computation graph with reverse-mode gradients.
//
// A Graph is an append-only tape of nodes. Expr is a light handle (graph
// pointer + node index) with the usual arithmetic overloads, so building an
// expression records it. Operands always precede their consumers, which makes
// the tape acyclic and lets every sweep run in index order.
//
// Nested differentiation (derivatives of network outputs with respect to the
// network inputs, themselves differentiated with respect to the parameters) is
// provided by input_jet(), a forward-mode source transform that appends the
// derivative expressions to the same tape.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ipinn::ad {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Tanh,
  Sigmoid,
  Sin,
  Cos,
  Exp,
  Square,
};

std::string_view op_name(Op op);

using NodeId = std::uint32_t;
using VarId = std::uint32_t;

class Graph;

class Expr {
 public:
  Expr() = default;
  Expr(Graph* graph, NodeId id) : graph_(graph), id_(id) {}

  bool valid() const { return graph_ != nullptr; }
  Graph* graph() const { return graph_; }
  NodeId id() const { return id_; }

  /// Value cached by the most recent scalar evaluation of this graph.
  double value() const;

 private:
  Graph* graph_ = nullptr;
  NodeId id_ = 0;
};

/// Variable name -> value.
using Bindings = std::map<std::string, double, std::less<>>;

/// Variable name -> partial derivative of the root.
using GradientMap = std::map<std::string, double, std::less<>>;

class Graph {
 public:
  struct Node {
    Op op;
    NodeId lhs = 0;
    NodeId rhs = 0;
    double constant = 0.0;  // literal for Constant, variable slot for Variable
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Expr constant(double value);
  /// Declares a new differentiable variable. Names must be unique.
  Expr variable(std::string name, double initial = 0.0);

  Expr unary(Op op, Expr operand);
  Expr binary(Op op, Expr lhs, Expr rhs);

  std::size_t size() const { return nodes_.size(); }
  std::size_t variable_count() const { return variable_names_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::string& variable_name(VarId var) const { return variable_names_[var]; }
  VarId variable_slot(Expr var) const;
  std::optional<Expr> find_variable(std::string_view name) const;
  bool is_constant(Expr e) const { return nodes_[e.id()].op == Op::Constant; }

  /// Sets the value a variable takes when evaluated through the slot API.
  void set(Expr var, double value);

  /// Evaluates the sub-tape up to `root` with every variable taken from
  /// `bindings`; unlisted variables raise UnboundVariableError.
  double evaluate(Expr root, const Bindings& bindings);
  /// Evaluates with the values last passed to set() / variable().
  double evaluate(Expr root);

  /// Reverse sweep from `root` using the values of the last evaluation.
  /// The result has an entry for every requested variable, zeros included.
  GradientMap gradient(Expr root, std::span<const Expr> wrt);
  /// Same sweep, returning adjoints indexed by variable slot.
  std::vector<double> gradient_slots(Expr root);

  double cached(NodeId id) const { return values_[id]; }

  /// Human-readable chain of nodes from `root` down to `target`.
  std::string describe_path(NodeId root, NodeId target) const;

 private:
  friend class BatchEvaluator;

  Expr push(Node node);
  std::vector<char> live_mask(NodeId root) const;
  void check_operand(Expr e) const;
  void forward(NodeId root);

  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<std::string> variable_names_;
  std::vector<NodeId> variable_nodes_;
  std::vector<double> variable_values_;
};

// Operator overloads record nodes in the operands' graph.
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double b);
Expr operator+(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator/(Expr a, double b);
Expr operator/(double a, Expr b);

Expr pow(Expr base, Expr exponent);
Expr pow(Expr base, double exponent);
Expr tanh(Expr a);
Expr sigmoid(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);
/// |a|^2, which for real scalars is a*a.
Expr square(Expr a);

/// Evaluates one graph over many lanes at once (one lane per collocation
/// point). Values and adjoints are stored lane-contiguous per node.
class BatchEvaluator {
 public:
  BatchEvaluator(const Graph& graph, Eigen::Index lanes);

  Eigen::Index lanes() const { return lanes_; }

  /// Variable values, one column per variable slot.
  Eigen::Ref<Eigen::ArrayXd> input(VarId slot) { return inputs_.col(slot); }
  void set_input(Expr var, const Eigen::Ref<const Eigen::ArrayXd>& values);

  /// Forward sweep over every node `root` depends on.
  void forward(NodeId root);
  /// Forward sweep over the union of the roots' dependencies.
  void forward(std::span<const NodeId> roots);
  Eigen::Ref<const Eigen::ArrayXd> value(Expr e) const { return values_.col(e.id()); }

  /// Reverse sweep seeded with `seed` at `root`. Adjoints of the variables are
  /// readable through adjoint() afterwards.
  void backward(NodeId root, const Eigen::Ref<const Eigen::ArrayXd>& seed);
  Eigen::Ref<const Eigen::ArrayXd> adjoint(VarId slot) const;

 private:
  void check_finite(NodeId root, NodeId id, const char* what) const;

  const Graph* graph_;
  Eigen::Index lanes_;
  Eigen::ArrayXXd inputs_;
  Eigen::ArrayXXd values_;
  Eigen::ArrayXXd adjoints_;
};

/// Value and input derivatives of one forward-map output, as graph nodes.
/// Structurally zero derivatives are represented by invalid handles and are
/// reported as 0 by value_of().
struct Jet {
  Expr value;
  Expr dx;
  Expr dxx;
  Expr dt;
};

struct JetOrders {
  bool dx = true;
  bool dxx = true;
  bool dt = true;
};

/// Appends the derivative expressions d/dx, d2/dx2, d/dt of every output to
/// the graph. `t` may be invalid for time-independent maps. Every other
/// variable in the graph (network parameters, typically) stays live, so the
/// returned nodes can be differentiated once more with gradient().
std::vector<Jet> input_jet(Graph& graph, std::span<const Expr> outputs, Expr x, Expr t,
                           JetOrders orders = {});

/// Convenience form: builds x and t variables bound to `point`, records the
/// forward map and returns its jets.
using ForwardMap = std::function<std::vector<Expr>(Graph&, Expr x, Expr t)>;
std::vector<Jet> input_jet(Graph& graph, const ForwardMap& forward, double x, double t,
                           JetOrders orders = {});

/// Numeric value of a possibly structurally-zero jet entry after evaluation.
double value_of(Graph& graph, Expr e);

}  // namespace ipinn::ad
