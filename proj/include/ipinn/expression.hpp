#pragma once

// Small arithmetic expression language used for closed-form bound functions
// and for user-defined residuals, boundary targets and initial conditions.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: sin, cos, exp, tanh, sigmoid. Constant: pi. Every other name must
// appear in the caller's symbol table. Sub-expressions made only of constants
// are folded, so `u^-1` keeps a constant exponent.

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "ipinn/autodiff.hpp"

namespace ipinn {

using SymbolTable = std::map<std::string, ad::Expr, std::less<>>;

ad::Expr parse_expression(std::string_view source, ad::Graph& graph, const SymbolTable& symbols);

/// Names referenced by an expression (functions and `pi` excluded).
std::set<std::string> expression_symbols(std::string_view source);

/// Closed-form scalar function of (x, t) with exact input derivatives.
class FieldFunction {
 public:
  struct Jet {
    double value = 0.0;
    double dx = 0.0;
    double dxx = 0.0;
    double dt = 0.0;
  };
  struct BatchJet {
    Eigen::ArrayXd value, dx, dxx, dt;
  };

  FieldFunction(double constant);  // NOLINT(google-explicit-constructor)
  explicit FieldFunction(std::string expression);

  const std::string& expression() const;
  double operator()(double x, double t = 0.0) const;
  Jet jet(double x, double t = 0.0) const;
  BatchJet jet(const Eigen::ArrayXd& x, const Eigen::ArrayXd& t) const;

 private:
  struct Compiled;
  std::shared_ptr<const Compiled> compiled_;
};

}  // namespace ipinn
