#include "ipinn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "ipinn/error.hpp"

namespace ipinn::ad {

namespace {

double sigmoid_value(double v) {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

bool is_unary(Op op) {
  switch (op) {
    case Op::Neg:
    case Op::Tanh:
    case Op::Sigmoid:
    case Op::Sin:
    case Op::Cos:
    case Op::Exp:
    case Op::Square:
      return true;
    default:
      return false;
  }
}

bool is_binary(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Constant: return "constant";
    case Op::Variable: return "variable";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Pow: return "pow";
    case Op::Neg: return "neg";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Square: return "abs_square";
  }
  return "unknown";
}

double Expr::value() const {
  if (graph_ == nullptr) {
    throw ContractError("value() on an empty expression handle");
  }
  return graph_->cached(id_);
}

// ---------------------------------------------------------------------------
// Graph construction

Expr Graph::push(Node node) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(node);
  values_.push_back(0.0);
  return Expr(this, id);
}

void Graph::check_operand(Expr e) const {
  if (e.graph() != this) {
    throw ContractError("operand belongs to a different graph");
  }
  if (e.id() >= nodes_.size()) {
    throw ContractError("operand references a node that does not exist yet");
  }
}

Expr Graph::constant(double value) {
  Expr e = push(Node{Op::Constant, 0, 0, value});
  values_[e.id()] = value;
  return e;
}

Expr Graph::variable(std::string name, double initial) {
  if (find_variable(name)) {
    throw ContractError("duplicate variable name '" + name + "'");
  }
  const auto slot = static_cast<VarId>(variable_names_.size());
  Expr e = push(Node{Op::Variable, 0, 0, static_cast<double>(slot)});
  variable_names_.push_back(std::move(name));
  variable_nodes_.push_back(e.id());
  variable_values_.push_back(initial);
  values_[e.id()] = initial;
  return e;
}

Expr Graph::unary(Op op, Expr operand) {
  if (!is_unary(op)) {
    throw ContractError("not a unary operation: " + std::string(op_name(op)));
  }
  check_operand(operand);
  return push(Node{op, operand.id(), 0, 0.0});
}

Expr Graph::binary(Op op, Expr lhs, Expr rhs) {
  if (!is_binary(op)) {
    throw ContractError("not a binary operation: " + std::string(op_name(op)));
  }
  check_operand(lhs);
  check_operand(rhs);
  return push(Node{op, lhs.id(), rhs.id(), 0.0});
}

VarId Graph::variable_slot(Expr var) const {
  check_operand(var);
  const Node& n = nodes_[var.id()];
  if (n.op != Op::Variable) {
    throw ContractError("expression is not a variable");
  }
  return static_cast<VarId>(n.constant);
}

std::optional<Expr> Graph::find_variable(std::string_view name) const {
  for (std::size_t i = 0; i < variable_names_.size(); ++i) {
    if (variable_names_[i] == name) {
      return Expr(const_cast<Graph*>(this), variable_nodes_[i]);
    }
  }
  return std::nullopt;
}

void Graph::set(Expr var, double value) { variable_values_[variable_slot(var)] = value; }

// ---------------------------------------------------------------------------
// Scalar sweeps

std::string Graph::describe_path(NodeId root, NodeId target) const {
  // Breadth-first search from the root along operand links.
  std::unordered_map<NodeId, NodeId> parent;
  std::vector<NodeId> queue{root};
  parent[root] = root;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId id = queue[head];
    if (id == target) {
      break;
    }
    const Node& n = nodes_[id];
    auto visit = [&](NodeId child) {
      if (parent.emplace(child, id).second) {
        queue.push_back(child);
      }
    };
    if (is_unary(n.op)) {
      visit(n.lhs);
    } else if (is_binary(n.op)) {
      visit(n.lhs);
      visit(n.rhs);
    }
  }
  std::vector<NodeId> chain;
  if (parent.count(target) != 0) {
    for (NodeId id = target;; id = parent[id]) {
      chain.push_back(id);
      if (id == root) {
        break;
      }
    }
  } else {
    chain.push_back(target);
  }
  std::ostringstream os;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    if (it != chain.rbegin()) {
      os << " -> ";
    }
    const Node& n = nodes_[*it];
    os << '#' << *it << " (" << op_name(n.op);
    if (n.op == Op::Variable) {
      os << ' ' << variable_names_[static_cast<std::size_t>(n.constant)];
    }
    os << ')';
  }
  return os.str();
}

std::vector<char> Graph::live_mask(NodeId root) const {
  std::vector<char> live(root + 1, 0);
  live[root] = 1;
  for (NodeId id = root + 1; id-- > 0;) {
    if (!live[id]) {
      continue;
    }
    const Node& n = nodes_[id];
    if (is_unary(n.op)) {
      live[n.lhs] = 1;
    } else if (is_binary(n.op)) {
      live[n.lhs] = 1;
      live[n.rhs] = 1;
    }
  }
  return live;
}

void Graph::forward(NodeId root) {
  const std::vector<char> live = live_mask(root);
  for (NodeId id = 0; id <= root; ++id) {
    if (!live[id]) {
      continue;
    }
    const Node& n = nodes_[id];
    double v = 0.0;
    const double a = values_[n.lhs];
    const double b = values_[n.rhs];
    switch (n.op) {
      case Op::Constant: v = n.constant; break;
      case Op::Variable: v = variable_values_[static_cast<std::size_t>(n.constant)]; break;
      case Op::Add: v = a + b; break;
      case Op::Sub: v = a - b; break;
      case Op::Mul: v = a * b; break;
      case Op::Div: v = a / b; break;
      case Op::Pow: v = std::pow(a, b); break;
      case Op::Neg: v = -a; break;
      case Op::Tanh: v = std::tanh(a); break;
      case Op::Sigmoid: v = sigmoid_value(a); break;
      case Op::Sin: v = std::sin(a); break;
      case Op::Cos: v = std::cos(a); break;
      case Op::Exp: v = std::exp(a); break;
      case Op::Square: v = a * a; break;
    }
    if (!std::isfinite(v)) {
      throw NonFiniteError("non-finite value at " + describe_path(root, id));
    }
    values_[id] = v;
  }
}

double Graph::evaluate(Expr root, const Bindings& bindings) {
  check_operand(root);
  // Only variables the root actually depends on must be bound.
  const std::vector<char> live = live_mask(root.id());
  for (NodeId id = 0; id <= root.id(); ++id) {
    const Node& n = nodes_[id];
    if (live[id] && n.op == Op::Variable) {
      const auto slot = static_cast<std::size_t>(n.constant);
      auto it = bindings.find(variable_names_[slot]);
      if (it == bindings.end()) {
        throw UnboundVariableError("unbound variable '" + variable_names_[slot] + "'");
      }
      variable_values_[slot] = it->second;
    }
  }
  forward(root.id());
  return values_[root.id()];
}

double Graph::evaluate(Expr root) {
  check_operand(root);
  forward(root.id());
  return values_[root.id()];
}

std::vector<double> Graph::gradient_slots(Expr root) {
  check_operand(root);
  const NodeId r = root.id();
  std::vector<double> adj(r + 1, 0.0);
  adj[r] = 1.0;
  std::vector<double> out(variable_names_.size(), 0.0);
  for (NodeId id = r + 1; id-- > 0;) {
    const double g = adj[id];
    if (g == 0.0) {
      continue;
    }
    if (!std::isfinite(g)) {
      throw NonFiniteError("non-finite adjoint at " + describe_path(r, id));
    }
    const Node& n = nodes_[id];
    const double a = values_[n.lhs];
    const double b = values_[n.rhs];
    const double v = values_[id];
    switch (n.op) {
      case Op::Constant: break;
      case Op::Variable: out[static_cast<std::size_t>(n.constant)] += g; break;
      case Op::Add: adj[n.lhs] += g; adj[n.rhs] += g; break;
      case Op::Sub: adj[n.lhs] += g; adj[n.rhs] -= g; break;
      case Op::Mul: adj[n.lhs] += g * b; adj[n.rhs] += g * a; break;
      case Op::Div:
        adj[n.lhs] += g / b;
        adj[n.rhs] -= g * v / b;
        break;
      case Op::Pow:
        adj[n.lhs] += g * b * std::pow(a, b - 1.0);
        if (nodes_[n.rhs].op != Op::Constant) {
          adj[n.rhs] += g * v * std::log(a);
        }
        break;
      case Op::Neg: adj[n.lhs] -= g; break;
      case Op::Tanh: adj[n.lhs] += g * (1.0 - v * v); break;
      case Op::Sigmoid: adj[n.lhs] += g * v * (1.0 - v); break;
      case Op::Sin: adj[n.lhs] += g * std::cos(a); break;
      case Op::Cos: adj[n.lhs] -= g * std::sin(a); break;
      case Op::Exp: adj[n.lhs] += g * v; break;
      case Op::Square: adj[n.lhs] += 2.0 * g * a; break;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) {
      throw NonFiniteError("non-finite adjoint at " + describe_path(r, variable_nodes_[i]));
    }
  }
  return out;
}

GradientMap Graph::gradient(Expr root, std::span<const Expr> wrt) {
  if (wrt.empty()) {
    throw ContractError("gradient requested with respect to no variables");
  }
  const std::vector<double> slots = gradient_slots(root);
  GradientMap out;
  for (const Expr& v : wrt) {
    const VarId slot = variable_slot(v);
    out[variable_names_[slot]] = slots[slot];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Operators

namespace {

Graph& graph_of(Expr a) {
  if (!a.valid()) {
    throw ContractError("operation on an empty expression handle");
  }
  return *a.graph();
}

}  // namespace

Expr operator+(Expr a, Expr b) { return graph_of(a).binary(Op::Add, a, b); }
Expr operator-(Expr a, Expr b) { return graph_of(a).binary(Op::Sub, a, b); }
Expr operator*(Expr a, Expr b) { return graph_of(a).binary(Op::Mul, a, b); }
Expr operator/(Expr a, Expr b) { return graph_of(a).binary(Op::Div, a, b); }
Expr operator-(Expr a) { return graph_of(a).unary(Op::Neg, a); }
Expr operator+(Expr a, double b) { return a + graph_of(a).constant(b); }
Expr operator+(double a, Expr b) { return graph_of(b).constant(a) + b; }
Expr operator-(Expr a, double b) { return a - graph_of(a).constant(b); }
Expr operator-(double a, Expr b) { return graph_of(b).constant(a) - b; }
Expr operator*(Expr a, double b) { return a * graph_of(a).constant(b); }
Expr operator*(double a, Expr b) { return graph_of(b).constant(a) * b; }
Expr operator/(Expr a, double b) { return a / graph_of(a).constant(b); }
Expr operator/(double a, Expr b) { return graph_of(b).constant(a) / b; }

Expr pow(Expr base, Expr exponent) { return graph_of(base).binary(Op::Pow, base, exponent); }
Expr pow(Expr base, double exponent) { return pow(base, graph_of(base).constant(exponent)); }
Expr tanh(Expr a) { return graph_of(a).unary(Op::Tanh, a); }
Expr sigmoid(Expr a) { return graph_of(a).unary(Op::Sigmoid, a); }
Expr sin(Expr a) { return graph_of(a).unary(Op::Sin, a); }
Expr cos(Expr a) { return graph_of(a).unary(Op::Cos, a); }
Expr exp(Expr a) { return graph_of(a).unary(Op::Exp, a); }
Expr square(Expr a) { return graph_of(a).unary(Op::Square, a); }

// ---------------------------------------------------------------------------
// Batched sweeps

BatchEvaluator::BatchEvaluator(const Graph& graph, Eigen::Index lanes)
    : graph_(&graph),
      lanes_(lanes),
      inputs_(Eigen::ArrayXXd::Zero(lanes, static_cast<Eigen::Index>(graph.variable_count()))),
      values_(lanes, static_cast<Eigen::Index>(graph.size())),
      adjoints_(lanes, static_cast<Eigen::Index>(graph.size())) {}

void BatchEvaluator::set_input(Expr var, const Eigen::Ref<const Eigen::ArrayXd>& values) {
  if (values.size() != lanes_) {
    throw ShapeError("batch input has " + std::to_string(values.size()) + " lanes, expected " +
                     std::to_string(lanes_));
  }
  inputs_.col(graph_->variable_slot(var)) = values;
}

void BatchEvaluator::check_finite(NodeId root, NodeId id, const char* what) const {
  const auto col = (what[0] == 'v') ? values_.col(id) : adjoints_.col(id);
  if (!col.isFinite().all()) {
    Eigen::Index lane = 0;
    for (; lane < lanes_; ++lane) {
      if (!std::isfinite(col(lane))) {
        break;
      }
    }
    throw NonFiniteError("non-finite " + std::string(what) + " in lane " + std::to_string(lane) +
                         " at " + graph_->describe_path(root, id),
                         static_cast<std::ptrdiff_t>(lane));
  }
}

void BatchEvaluator::forward(NodeId root) { forward(std::span<const NodeId>(&root, 1)); }

void BatchEvaluator::forward(std::span<const NodeId> roots) {
  if (roots.empty()) {
    return;
  }
  const auto& nodes = graph_->nodes_;
  const NodeId root = *std::max_element(roots.begin(), roots.end());
  std::vector<char> live(root + 1, 0);
  for (NodeId r : roots) {
    const std::vector<char> mask = graph_->live_mask(r);
    for (NodeId id = 0; id <= r; ++id) {
      live[id] |= mask[id];
    }
  }
  for (NodeId id = 0; id <= root; ++id) {
    if (!live[id]) {
      continue;
    }
    const Graph::Node& n = nodes[id];
    auto v = values_.col(id);
    const auto a = values_.col(n.lhs);
    const auto b = values_.col(n.rhs);
    switch (n.op) {
      case Op::Constant: v.setConstant(n.constant); break;
      case Op::Variable: v = inputs_.col(static_cast<Eigen::Index>(n.constant)); break;
      case Op::Add: v = a + b; break;
      case Op::Sub: v = a - b; break;
      case Op::Mul: v = a * b; break;
      case Op::Div: v = a / b; break;
      case Op::Pow:
        for (Eigen::Index i = 0; i < lanes_; ++i) {
          v(i) = std::pow(a(i), b(i));
        }
        break;
      case Op::Neg: v = -a; break;
      case Op::Tanh: v = a.tanh(); break;
      case Op::Sigmoid:
        for (Eigen::Index i = 0; i < lanes_; ++i) {
          v(i) = sigmoid_value(a(i));
        }
        break;
      case Op::Sin: v = a.sin(); break;
      case Op::Cos: v = a.cos(); break;
      case Op::Exp: v = a.exp(); break;
      case Op::Square: v = a.square(); break;
    }
    check_finite(root, id, "value");
  }
}

void BatchEvaluator::backward(NodeId root, const Eigen::Ref<const Eigen::ArrayXd>& seed) {
  const auto& nodes = graph_->nodes_;
  adjoints_.setZero();
  adjoints_.col(root) = seed;
  const std::vector<char> live = graph_->live_mask(root);
  for (NodeId id = root + 1; id-- > 0;) {
    const Graph::Node& n = nodes[id];
    if (!live[id] || n.op == Op::Constant || n.op == Op::Variable) {
      continue;
    }
    check_finite(root, id, "adjoint");
    const auto g = adjoints_.col(id);
    const auto a = values_.col(n.lhs);
    const auto b = values_.col(n.rhs);
    const auto v = values_.col(id);
    auto da = adjoints_.col(n.lhs);
    switch (n.op) {
      case Op::Add:
        da += g;
        adjoints_.col(n.rhs) += g;
        break;
      case Op::Sub:
        da += g;
        adjoints_.col(n.rhs) -= g;
        break;
      case Op::Mul:
        // Self-products (a*a) hit the same column twice, which is intended.
        da += g * b;
        adjoints_.col(n.rhs) += g * a;
        break;
      case Op::Div:
        da += g / b;
        adjoints_.col(n.rhs) -= g * v / b;
        break;
      case Op::Pow:
        for (Eigen::Index i = 0; i < lanes_; ++i) {
          da(i) += g(i) * b(i) * std::pow(a(i), b(i) - 1.0);
        }
        if (nodes[n.rhs].op != Op::Constant) {
          for (Eigen::Index i = 0; i < lanes_; ++i) {
            adjoints_(i, n.rhs) += g(i) * v(i) * std::log(a(i));
          }
        }
        break;
      case Op::Neg: da -= g; break;
      case Op::Tanh: da += g * (1.0 - v.square()); break;
      case Op::Sigmoid: da += g * v * (1.0 - v); break;
      case Op::Sin: da += g * a.cos(); break;
      case Op::Cos: da -= g * a.sin(); break;
      case Op::Exp: da += g * v; break;
      case Op::Square: da += 2.0 * g * a; break;
      case Op::Constant:
      case Op::Variable: break;
    }
  }
  for (NodeId var : graph_->variable_nodes_) {
    if (var <= root && live[var]) {
      check_finite(root, var, "adjoint");
    }
  }
}

Eigen::Ref<const Eigen::ArrayXd> BatchEvaluator::adjoint(VarId slot) const {
  return adjoints_.col(graph_->variable_nodes_[slot]);
}

// ---------------------------------------------------------------------------
// Input jets: forward-mode source transform on the tape.

namespace {

// Arithmetic on possibly-absent (structurally zero) handles.
Expr add(Expr a, Expr b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  return a + b;
}
Expr sub(Expr a, Expr b) {
  if (!b.valid()) return a;
  if (!a.valid()) return -b;
  return a - b;
}
Expr mul(Expr a, Expr b) {
  if (!a.valid() || !b.valid()) return {};
  return a * b;
}
Expr scale(double c, Expr a) {
  if (!a.valid()) return {};
  return c * a;
}
Expr neg(Expr a) {
  if (!a.valid()) return {};
  return -a;
}

}  // namespace

std::vector<Jet> input_jet(Graph& graph, std::span<const Expr> outputs, Expr x, Expr t,
                           JetOrders orders) {
  if (outputs.empty()) {
    return {};
  }
  NodeId last = 0;
  for (const Expr& e : outputs) {
    if (e.graph() != &graph) {
      throw ContractError("jet output belongs to a different graph");
    }
    last = std::max(last, e.id());
  }
  const bool need_x = orders.dx || orders.dxx;
  // Walk the original tape in order. New nodes appended here have ids > last
  // and are never revisited.
  std::vector<Jet> jets(last + 1);
  for (NodeId id = 0; id <= last; ++id) {
    const Graph::Node n = graph.node(id);
    Jet& out = jets[id];
    out.value = Expr(&graph, id);
    const Jet a = jets[n.lhs];
    const Jet b = jets[n.rhs];
    switch (n.op) {
      case Op::Constant:
        break;
      case Op::Variable:
        if (x.valid() && id == x.id()) {
          if (need_x) out.dx = graph.constant(1.0);
        } else if (t.valid() && id == t.id()) {
          if (orders.dt) out.dt = graph.constant(1.0);
        }
        break;
      case Op::Add:
        out.dx = add(a.dx, b.dx);
        out.dxx = add(a.dxx, b.dxx);
        out.dt = add(a.dt, b.dt);
        break;
      case Op::Sub:
        out.dx = sub(a.dx, b.dx);
        out.dxx = sub(a.dxx, b.dxx);
        out.dt = sub(a.dt, b.dt);
        break;
      case Op::Neg:
        out.dx = neg(a.dx);
        out.dxx = neg(a.dxx);
        out.dt = neg(a.dt);
        break;
      case Op::Mul: {
        const Expr av = a.value, bv = b.value;
        out.dx = add(mul(a.dx, bv), mul(av, b.dx));
        out.dt = add(mul(a.dt, bv), mul(av, b.dt));
        if (orders.dxx) {
          out.dxx = add(add(mul(a.dxx, bv), scale(2.0, mul(a.dx, b.dx))), mul(av, b.dxx));
        }
        break;
      }
      case Op::Div: {
        // q = a/b, q' = (a' - q b')/b, q'' = (a'' - 2 q' b' - q b'')/b
        const Expr q = out.value, bv = b.value;
        auto first = [&](Expr da, Expr db) -> Expr {
          Expr num = sub(da, mul(q, db));
          return num.valid() ? num / bv : Expr{};
        };
        out.dx = first(a.dx, b.dx);
        out.dt = first(a.dt, b.dt);
        if (orders.dxx) {
          Expr num = sub(sub(a.dxx, scale(2.0, mul(out.dx, b.dx))), mul(q, b.dxx));
          out.dxx = num.valid() ? num / bv : Expr{};
        }
        break;
      }
      case Op::Pow: {
        if (!graph.is_constant(b.value)) {
          throw UnsupportedOperationError("input_jet: pow with non-constant exponent");
        }
        const double c = graph.node(n.rhs).constant;
        const Expr av = a.value;
        Expr d1;  // c a^(c-1)
        Expr d2;  // c (c-1) a^(c-2)
        if (a.dx.valid() || a.dt.valid() || a.dxx.valid()) {
          d1 = c == 1.0 ? graph.constant(1.0) : c * pow(av, c - 1.0);
          if (orders.dxx && a.dx.valid()) {
            d2 = (c == 1.0) ? Expr{} : (c == 2.0 ? graph.constant(2.0) : c * (c - 1.0) * pow(av, c - 2.0));
          }
        }
        out.dx = mul(d1, a.dx);
        out.dt = mul(d1, a.dt);
        if (orders.dxx) out.dxx = add(mul(d2, mul(a.dx, a.dx)), mul(d1, a.dxx));
        break;
      }
      case Op::Tanh:
      case Op::Sigmoid:
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Square: {
        if (!a.dx.valid() && !a.dt.valid() && !a.dxx.valid()) {
          break;
        }
        const Expr y = out.value, av = a.value;
        Expr d1, d2;
        switch (n.op) {
          case Op::Tanh:
            d1 = 1.0 - y * y;
            if (orders.dxx) d2 = -2.0 * y * d1;
            break;
          case Op::Sigmoid:
            d1 = y * (1.0 - y);
            if (orders.dxx) d2 = d1 * (1.0 - 2.0 * y);
            break;
          case Op::Sin:
            d1 = cos(av);
            if (orders.dxx) d2 = -y;
            break;
          case Op::Cos:
            d1 = -sin(av);
            if (orders.dxx) d2 = -y;
            break;
          case Op::Exp:
            d1 = y;
            d2 = y;
            break;
          default:  // Square
            d1 = 2.0 * av;
            d2 = graph.constant(2.0);
            break;
        }
        out.dx = mul(d1, a.dx);
        out.dt = mul(d1, a.dt);
        if (orders.dxx) out.dxx = add(mul(d2, mul(a.dx, a.dx)), mul(d1, a.dxx));
        break;
      }
    }
    if (!orders.dx && !orders.dxx) out.dx = {};
    if (!orders.dt) out.dt = {};
  }
  // Drop dx from the result if it was only kept to build dxx.
  std::vector<Jet> result;
  result.reserve(outputs.size());
  for (const Expr& e : outputs) {
    Jet j = jets[e.id()];
    if (!orders.dx) j.dx = {};
    if (!orders.dxx) j.dxx = {};
    result.push_back(j);
  }
  return result;
}

std::vector<Jet> input_jet(Graph& graph, const ForwardMap& forward, double x, double t,
                           JetOrders orders) {
  Expr xv = graph.variable("x", x);
  Expr tv = graph.variable("t", t);
  std::vector<Expr> outputs = forward(graph, xv, tv);
  for (const Expr& e : outputs) {
    if (!e.valid() || e.graph() != &graph) {
      throw ContractError("forward map returned an expression outside the graph");
    }
  }
  return input_jet(graph, outputs, xv, tv, orders);
}

double value_of(Graph& graph, Expr e) {
  if (!e.valid()) {
    return 0.0;
  }
  return graph.evaluate(e);
}

}  // namespace ipinn::ad
