#include "ipinn/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include "ipinn/error.hpp"

namespace ipinn {

namespace {

class Parser {
 public:
  Parser(std::string_view src, ad::Graph* graph, const SymbolTable* symbols)
      : src_(src), graph_(graph), symbols_(symbols) {}

  ad::Expr parse() {
    ad::Expr e = expr();
    skip_space();
    if (pos_ != src_.size()) {
      throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    }
    return e;
  }

  std::set<std::string> names;

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Constant folding keeps exponents like `-1` or `1/2` as literal nodes.
  std::optional<double> literal(ad::Expr e) const {
    if (graph_ != nullptr && graph_->is_constant(e)) {
      return graph_->node(e.id()).constant;
    }
    return std::nullopt;
  }

  ad::Expr constant(double v) { return graph_ != nullptr ? graph_->constant(v) : ad::Expr{}; }

  ad::Expr fold_binary(char op, ad::Expr a, ad::Expr b) {
    if (graph_ == nullptr) {
      return {};
    }
    const auto la = literal(a);
    const auto lb = literal(b);
    if (la && lb) {
      switch (op) {
        case '+': return constant(*la + *lb);
        case '-': return constant(*la - *lb);
        case '*': return constant(*la * *lb);
        case '/': return constant(*la / *lb);
        default: return constant(std::pow(*la, *lb));
      }
    }
    switch (op) {
      case '+': return a + b;
      case '-': return a - b;
      case '*': return a * b;
      case '/': return a / b;
      default: return ad::pow(a, b);
    }
  }

  ad::Expr expr() {
    ad::Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = fold_binary('+', lhs, term());
      } else if (accept('-')) {
        lhs = fold_binary('-', lhs, term());
      } else {
        return lhs;
      }
    }
  }

  ad::Expr term() {
    ad::Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = fold_binary('*', lhs, unary());
      } else if (accept('/')) {
        lhs = fold_binary('/', lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  ad::Expr unary() {
    if (accept('-')) {
      ad::Expr operand = unary();
      if (graph_ == nullptr) return {};
      if (auto l = literal(operand)) return constant(-*l);
      return -operand;
    }
    if (accept('+')) {
      return unary();
    }
    return power();
  }

  ad::Expr power() {
    ad::Expr base = primary();
    if (accept('^')) {
      return fold_binary('^', base, unary());
    }
    return base;
  }

  ad::Expr primary() {
    skip_space();
    if (pos_ >= src_.size()) {
      throw ParseError("unexpected end of expression", pos_);
    }
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      ad::Expr inner = expr();
      if (!accept(')')) {
        throw ParseError("expected ')'", pos_);
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double value = 0.0;
      const char* begin = src_.data() + pos_;
      auto [end, ec] = std::from_chars(begin, src_.data() + src_.size(), value);
      if (ec != std::errc()) {
        throw ParseError("malformed number", pos_);
      }
      pos_ += static_cast<std::size_t>(end - begin);
      return constant(value);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        ++pos_;
      }
      const std::string name(src_.substr(start, pos_ - start));
      if (accept('(')) {
        ad::Expr arg = expr();
        if (!accept(')')) {
          throw ParseError("expected ')' after argument of " + name, pos_);
        }
        return call(name, arg, start);
      }
      if (name == "pi") {
        return constant(std::numbers::pi);
      }
      names.insert(name);
      if (symbols_ == nullptr) {
        return {};
      }
      auto it = symbols_->find(name);
      if (it == symbols_->end()) {
        throw ParseError("unknown symbol '" + name + "'", start);
      }
      return it->second;
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  ad::Expr call(const std::string& name, ad::Expr arg, std::size_t where) {
    using Fn = ad::Expr (*)(ad::Expr);
    using Num = double (*)(double);
    Fn fn = nullptr;
    Num num = nullptr;
    if (name == "sin") {
      fn = ad::sin;
      num = [](double v) { return std::sin(v); };
    } else if (name == "cos") {
      fn = ad::cos;
      num = [](double v) { return std::cos(v); };
    } else if (name == "exp") {
      fn = ad::exp;
      num = [](double v) { return std::exp(v); };
    } else if (name == "tanh") {
      fn = ad::tanh;
      num = [](double v) { return std::tanh(v); };
    } else if (name == "sigmoid") {
      fn = ad::sigmoid;
      num = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    } else {
      throw ParseError("unknown function '" + name + "'", where);
    }
    if (graph_ == nullptr) {
      return {};
    }
    if (auto l = literal(arg)) {
      return constant(num(*l));
    }
    return fn(arg);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  ad::Graph* graph_;
  const SymbolTable* symbols_;
};

}  // namespace

ad::Expr parse_expression(std::string_view source, ad::Graph& graph, const SymbolTable& symbols) {
  Parser parser(source, &graph, &symbols);
  return parser.parse();
}

std::set<std::string> expression_symbols(std::string_view source) {
  Parser parser(source, nullptr, nullptr);
  parser.parse();
  return parser.names;
}

// ---------------------------------------------------------------------------

struct FieldFunction::Compiled {
  std::string source;
  ad::Graph graph;
  ad::Expr x, t;
  ad::Jet jet;
  std::vector<ad::NodeId> roots;
};

FieldFunction::FieldFunction(double constant) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, constant);
  std::string text(buf, end);
  if (constant < 0) {
    text = "(" + text + ")";
  }
  *this = FieldFunction(text);
}

FieldFunction::FieldFunction(std::string expression) {
  auto c = std::make_shared<Compiled>();
  c->source = std::move(expression);
  c->x = c->graph.variable("x");
  c->t = c->graph.variable("t");
  const SymbolTable symbols{{"x", c->x}, {"t", c->t}};
  ad::Expr root = parse_expression(c->source, c->graph, symbols);
  ad::Expr outputs[] = {root};
  c->jet = ad::input_jet(c->graph, outputs, c->x, c->t).front();
  for (ad::Expr e : {c->jet.value, c->jet.dx, c->jet.dxx, c->jet.dt}) {
    if (e.valid()) {
      c->roots.push_back(e.id());
    }
  }
  compiled_ = std::move(c);
}

const std::string& FieldFunction::expression() const { return compiled_->source; }

double FieldFunction::operator()(double x, double t) const { return jet(x, t).value; }

FieldFunction::Jet FieldFunction::jet(double x, double t) const {
  const BatchJet b = jet(Eigen::ArrayXd::Constant(1, x), Eigen::ArrayXd::Constant(1, t));
  return Jet{b.value(0), b.dx(0), b.dxx(0), b.dt(0)};
}

FieldFunction::BatchJet FieldFunction::jet(const Eigen::ArrayXd& x, const Eigen::ArrayXd& t) const {
  const Compiled& c = *compiled_;
  ad::BatchEvaluator eval(c.graph, x.size());
  eval.set_input(c.x, x);
  eval.set_input(c.t, t);
  eval.forward(c.roots);
  auto read = [&](ad::Expr e) -> Eigen::ArrayXd {
    if (!e.valid()) {
      return Eigen::ArrayXd::Zero(x.size());
    }
    return eval.value(e);
  };
  return BatchJet{read(c.jet.value), read(c.jet.dx), read(c.jet.dxx), read(c.jet.dt)};
}

}  // namespace ipinn
