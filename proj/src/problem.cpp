#include "ipinn/problem.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "ipinn/error.hpp"

namespace ipinn {

namespace {

std::string component_name(const ProblemDefinition& p, int c) {
  return p.components == 1 ? std::string("u") : "u" + std::to_string(c + 1);
}

// Every accepted symbol name with its layout slot.
std::vector<std::pair<std::string, int>> symbol_slots(const ProblemDefinition& p) {
  const SymbolLayout L(p.components, p.field_count());
  std::vector<std::pair<std::string, int>> out{{"x", L.x()}, {"t", L.t()}};
  for (int c = 0; c < p.components; ++c) {
    const std::string u = component_name(p, c);
    out.emplace_back(u, L.u(c));
    out.emplace_back(u + "_x", L.u_x(c));
    out.emplace_back(u + "_xx", L.u_xx(c));
    out.emplace_back(u + "_t", L.u_t(c));
  }
  for (int i = 0; i < p.field_count(); ++i) {
    std::vector<std::string> names{"P" + std::to_string(i + 1)};
    const std::string& alias = p.fields[static_cast<std::size_t>(i)].name;
    if (!alias.empty() && alias != names[0]) names.push_back(alias);
    for (const std::string& n : names) {
      out.emplace_back(n, L.field(i));
      out.emplace_back(n + "_x", L.field_x(i));
      out.emplace_back(n + "_t", L.field_t(i));
    }
  }
  return out;
}

int slot_of(const std::vector<std::pair<std::string, int>>& slots, const std::string& name) {
  for (const auto& [n, s] : slots) {
    if (n == name) return s;
  }
  return -1;
}

std::vector<std::string> all_expressions(const ProblemDefinition& p) {
  std::vector<std::string> out = p.residual;
  for (const BoundaryCondition& bc : p.boundary) out.push_back(bc.target);
  for (const InitialCondition& ic : p.initial) out.push_back(ic.value);
  return out;
}

std::string format_point(double x, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "x=" << x << ", t=" << t;
  return os.str();
}

}  // namespace

int ProblemDefinition::input_width() const { return (!constant_input && time) ? 2 : 1; }

nn::InputLayout ProblemDefinition::input_layout() const {
  if (constant_input) return {};
  return time ? nn::InputLayout{0, 1} : nn::InputLayout{0, -1};
}

DerivativeNeeds ProblemDefinition::needs() const {
  const auto slots = symbol_slots(*this);
  const SymbolLayout L(components, field_count());
  DerivativeNeeds n;
  for (const std::string& src : all_expressions(*this)) {
    for (const std::string& name : expression_symbols(src)) {
      const int s = slot_of(slots, name);
      for (int c = 0; c < components; ++c) {
        n.u_x |= s == L.u_x(c);
        n.u_xx |= s == L.u_xx(c);
        n.u_t |= s == L.u_t(c);
      }
      for (int i = 0; i < field_count(); ++i) {
        n.field_x |= s == L.field_x(i);
        n.field_t |= s == L.field_t(i);
      }
    }
  }
  for (const BoundaryCondition& bc : boundary) {
    n.u_x |= bc.kind == BoundaryKind::Derivative;
  }
  return n;
}

void ProblemDefinition::validate(int samples) const {
  if (components < 1) throw ContractError("problem needs at least one primary component");
  if (residual.empty()) throw ContractError("problem '" + name + "' has no residual");
  if (!(space.lower <= space.upper)) throw InvalidBoundsError("space domain is reversed");
  if (time && !(time->lower <= time->upper)) throw InvalidBoundsError("time domain is reversed");
  if (constant_input && time) {
    throw ContractError("constant-input problems cannot have a time domain");
  }
  ad::Graph g;
  const SymbolTable symbols = point_symbols(*this, g);
  for (const std::string& src : all_expressions(*this)) {
    parse_expression(src, g, symbols);
  }
  for (const BoundaryCondition& bc : boundary) {
    if (bc.location != space.lower && bc.location != space.upper) {
      std::ostringstream os;
      os << "boundary condition at x=" << bc.location << " is not on the domain boundary";
      throw ContractError(os.str());
    }
    if (bc.component < 0 || bc.component >= components) {
      throw ContractError("boundary condition refers to a missing component");
    }
  }
  if (!initial.empty() && !time) {
    throw ContractError("initial conditions need a time domain");
  }
  for (const InitialCondition& ic : initial) {
    if (ic.component < 0 || ic.component >= components) {
      throw ContractError("initial condition refers to a missing component");
    }
  }
  for (const FieldSpec& f : fields) {
    f.bounds.validate(space, time, samples);
  }
}

SymbolTable point_symbols(const ProblemDefinition& problem, ad::Graph& graph) {
  const auto slots = symbol_slots(problem);
  const SymbolLayout L(problem.components, problem.field_count());
  std::vector<ad::Expr> vars;
  vars.reserve(static_cast<std::size_t>(L.size()));
  for (int s = 0; s < L.size(); ++s) {
    // First name registered for a slot is its canonical one.
    std::string name;
    for (const auto& [n, slot] : slots) {
      if (slot == s) {
        name = n;
        break;
      }
    }
    vars.push_back(graph.variable(name, 0.0));
  }
  SymbolTable table;
  for (const auto& [n, slot] : slots) {
    table.emplace(n, vars[static_cast<std::size_t>(slot)]);
  }
  return table;
}

std::vector<ad::Expr> residual_nodes(const ProblemDefinition& problem, ad::Graph& graph,
                                     const SymbolTable& symbols) {
  std::vector<ad::Expr> out;
  for (const std::string& src : problem.residual) {
    out.push_back(parse_expression(src, graph, symbols));
  }
  return out;
}

std::vector<double> residual(const ProblemDefinition& problem, const BranchState& state, double x,
                             double t) {
  const SymbolLayout L(problem.components, problem.field_count());
  const auto h = static_cast<std::size_t>(problem.components);
  const auto s = static_cast<std::size_t>(problem.field_count());
  if (state.u.size() != h || state.fields.size() != s) {
    throw ShapeError("branch state does not match the problem's components and fields");
  }
  std::vector<std::optional<double>> values(static_cast<std::size_t>(L.size()));
  values[0] = x;
  values[1] = t;
  auto opt = [](const std::vector<std::optional<double>>& v, std::size_t i) -> std::optional<double> {
    return i < v.size() ? v[i] : std::nullopt;
  };
  for (std::size_t c = 0; c < h; ++c) {
    const int ci = static_cast<int>(c);
    values[static_cast<std::size_t>(L.u(ci))] = state.u[c];
    values[static_cast<std::size_t>(L.u_x(ci))] = opt(state.u_x, c);
    values[static_cast<std::size_t>(L.u_xx(ci))] = opt(state.u_xx, c);
    values[static_cast<std::size_t>(L.u_t(ci))] = opt(state.u_t, c);
  }
  for (std::size_t i = 0; i < s; ++i) {
    const int ii = static_cast<int>(i);
    values[static_cast<std::size_t>(L.field(ii))] = state.fields[i];
    values[static_cast<std::size_t>(L.field_x(ii))] = opt(state.fields_x, i);
    values[static_cast<std::size_t>(L.field_t(ii))] = opt(state.fields_t, i);
  }

  const auto slots = symbol_slots(problem);
  for (const std::string& src : problem.residual) {
    for (const std::string& name : expression_symbols(src)) {
      const int slot = slot_of(slots, name);
      if (slot >= 0 && !values[static_cast<std::size_t>(slot)]) {
        throw ContractError("residual of '" + problem.name + "' needs " + name +
                            " but the branch state does not provide it");
      }
    }
  }

  ad::Graph g;
  const SymbolTable symbols = point_symbols(problem, g);
  const std::vector<ad::Expr> roots = residual_nodes(problem, g, symbols);
  ad::Bindings bindings;
  for (const auto& [name, slot] : slots) {
    const auto& v = values[static_cast<std::size_t>(slot)];
    if (v) bindings.emplace(name, *v);
  }
  std::vector<double> out;
  out.reserve(roots.size());
  for (ad::Expr r : roots) {
    out.push_back(g.evaluate(r, bindings));
  }
  return out;
}

// ---------------------------------------------------------------------------

SquaredTerms::SquaredTerms(const ProblemDefinition& problem,
                           const std::vector<std::string>& expressions, std::string label)
    : layout_(problem.components, problem.field_count()),
      label_(std::move(label)),
      graph_(std::make_unique<ad::Graph>()),
      uses_(static_cast<std::size_t>(layout_.size()), false) {
  if (expressions.empty()) {
    throw ContractError(label_ + ": no expressions");
  }
  const SymbolTable symbols = point_symbols(problem, *graph_);
  for (const std::string& src : expressions) {
    terms_.push_back(parse_expression(src, *graph_, symbols));
  }
  total_ = ad::square(terms_[0]);
  for (std::size_t k = 1; k < terms_.size(); ++k) {
    total_ = total_ + ad::square(terms_[k]);
  }
  const auto slots = symbol_slots(problem);
  for (const std::string& src : expressions) {
    for (const std::string& name : expression_symbols(src)) {
      const int slot = slot_of(slots, name);
      if (slot >= 0) uses_[static_cast<std::size_t>(slot)] = true;
    }
  }
}

const Eigen::ArrayXd& SquaredTerms::forward(const Eigen::ArrayXXd& inputs) {
  if (inputs.cols() != layout_.size()) {
    throw ShapeError(label_ + ": input table has the wrong number of symbol columns");
  }
  const Eigen::Index lanes = inputs.rows();
  if (!eval_ || eval_->lanes() != lanes) {
    eval_ = std::make_unique<ad::BatchEvaluator>(*graph_, lanes);
  }
  for (int s = 0; s < layout_.size(); ++s) {
    if (uses_[static_cast<std::size_t>(s)]) {
      eval_->input(static_cast<ad::VarId>(s)) = inputs.col(s);
    }
  }
  inputs_ = inputs;
  std::vector<ad::NodeId> roots;
  for (ad::Expr e : terms_) roots.push_back(e.id());
  roots.push_back(total_.id());
  try {
    eval_->forward(roots);
  } catch (const NonFiniteError& e) {
    std::string where;
    if (e.lane() >= 0 && e.lane() < lanes) {
      where = " at " + format_point(inputs(e.lane(), SymbolLayout::x()),
                                    inputs(e.lane(), SymbolLayout::t()));
    }
    throw NonFiniteError(label_ + " is non-finite" + where + " (" + e.what() + ")", e.lane());
  }
  sums_ = eval_->value(total_);
  return sums_;
}

Eigen::ArrayXd SquaredTerms::value(std::size_t k) const { return eval_->value(terms_.at(k)); }

const Eigen::ArrayXXd& SquaredTerms::backward(const Eigen::ArrayXd& seed) {
  if (!eval_ || seed.size() != eval_->lanes()) {
    throw ShapeError(label_ + ": backward seed does not match the last forward");
  }
  try {
    eval_->backward(total_.id(), seed);
  } catch (const NonFiniteError& e) {
    std::string where;
    if (e.lane() >= 0 && e.lane() < inputs_.rows()) {
      where = " at " + format_point(inputs_(e.lane(), SymbolLayout::x()),
                                    inputs_(e.lane(), SymbolLayout::t()));
    }
    throw NonFiniteError(label_ + " gradient is non-finite" + where + " (" + e.what() + ")",
                         e.lane());
  }
  adjoints_.setZero(seed.size(), layout_.size());
  for (int s = 0; s < layout_.size(); ++s) {
    if (uses_[static_cast<std::size_t>(s)]) {
      adjoints_.col(s) = eval_->adjoint(static_cast<ad::VarId>(s));
    }
  }
  return adjoints_;
}

// ---------------------------------------------------------------------------

ProblemDefinition builtin_toy_interval() {
  ProblemDefinition p;
  p.name = "toy-interval";
  p.space = {1.0, 1.0};
  p.constant_input = true;
  p.fields.push_back({"", IntervalField(FieldFunction(0.5), FieldFunction(2.0))});
  p.residual = {"u - P1*(2 - P1)"};
  p.defaults.solution_net = {2, 20};
  p.defaults.field_net = {2, 20};
  p.defaults.learning_rate = 1e-3;
  p.defaults.epochs = 35000;
  p.defaults.w_g = 1e5;
  p.defaults.space_points = 1;
  p.defaults.time_points = 1;
  return p;
}

ProblemDefinition builtin_bar_1d() {
  ProblemDefinition p;
  p.name = "bar-1d";
  p.space = {0.0, 2.0};
  p.fields.push_back(
      {"E", IntervalField(FieldFunction("0.5*sin(x) + 0.55"), FieldFunction("0.4*sin(2*x) + 1.4"))});
  p.fields.push_back(
      {"A", IntervalField(FieldFunction("cos(3*x) + 2"), FieldFunction("cos(3.8*x) + 3"))});
  // d/dx (E A u') + n, expanded; n(x) = x cos(3x).
  p.residual = {"(E_x*A + E*A_x)*u_x + E*A*u_xx + x*cos(3*x)"};
  p.boundary.push_back({0.0, BoundaryKind::Value, "0", 0});
  p.boundary.push_back({2.0, BoundaryKind::Derivative, "0.1/(E*A)", 0});
  p.defaults.solution_net = {4, 40};
  p.defaults.field_net = {5, 50};
  p.defaults.learning_rate = 1e-4;
  p.defaults.epochs = 500000;
  p.defaults.w_g = 1e5;
  p.defaults.space_points = 200;
  p.defaults.time_points = 1;
  return p;
}

ProblemDefinition builtin_nonlinear_pde() {
  ProblemDefinition p;
  p.name = "nonlinear-pde";
  p.space = {-1.0, 1.0};
  p.time = Interval{0.0, 1.0};
  p.fields.push_back({"k", IntervalField(FieldFunction("0.5*sin(3*x)*cos(t)"),
                                         FieldFunction("sin(3*x)*cos(t)^2 + 3"))});
  p.residual = {"u_t - 0.01*u*u_xx + k*u^3 - k^3"};
  p.boundary.push_back({-1.0, BoundaryKind::Value, "0", 0});
  p.boundary.push_back({1.0, BoundaryKind::Value, "0", 0});
  p.initial.push_back({"1 - x^2", 0});
  p.defaults.solution_net = {3, 40};
  p.defaults.field_net = {3, 40};
  p.defaults.learning_rate = 1e-4;
  p.defaults.epochs = 150000;
  p.defaults.w_g = 1e5;
  p.defaults.w_0 = 1e5;
  p.defaults.space_points = 125;
  p.defaults.time_points = 50;
  return p;
}

ProblemDefinition FuzzyProblem::at(double alpha) const {
  ProblemDefinition p = base;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    p.fields.at(i).bounds = fields[i].cut(alpha);
  }
  return p;
}

FuzzyProblem builtin_toy_fuzzy() {
  FuzzyProblem f;
  f.base = builtin_toy_interval();
  f.base.name = "toy-fuzzy";
  f.fields.push_back(FuzzyField::uniform(FuzzyNumber::triangular(0.5, 1.0, 2.0)));
  f.levels = {0.0, 0.25, 0.5, 0.75, 1.0};
  return f;
}

std::vector<std::string> builtin_names() {
  return {"toy-interval", "toy-fuzzy", "bar-1d", "nonlinear-pde"};
}

bool is_fuzzy_builtin(const std::string& name) { return name == "toy-fuzzy"; }

ProblemDefinition builtin_problem(const std::string& name) {
  if (name == "toy-interval") return builtin_toy_interval();
  if (name == "bar-1d") return builtin_bar_1d();
  if (name == "nonlinear-pde") return builtin_nonlinear_pde();
  if (name == "toy-fuzzy") {
    throw ConfigError("'toy-fuzzy' is a fuzzy problem; run it through the fuzzy driver");
  }
  throw ConfigError("unknown problem '" + name + "'");
}

FuzzyProblem builtin_fuzzy_problem(const std::string& name) {
  if (name == "toy-fuzzy") return builtin_toy_fuzzy();
  throw ConfigError("unknown fuzzy problem '" + name + "'");
}

}  // namespace ipinn
