#include <cmath>
#include <numbers>

#include "doctest.h"
#include "ipinn/error.hpp"
#include "ipinn/expression.hpp"

using namespace ipinn;

namespace {

double eval(const std::string& src, double x = 0.0, double t = 0.0) {
  ad::Graph g;
  SymbolTable s{{"x", g.variable("x", x)}, {"t", g.variable("t", t)}};
  return g.evaluate(parse_expression(src, g, s));
}

}  // namespace

TEST_CASE("parse: precedence and associativity") {
  CHECK(eval("1+2*3") == 7.0);
  CHECK(eval("(1+2)*3") == 9.0);
  CHECK(eval("2^3^2") == 512.0);
  CHECK(eval("-2^2") == -4.0);
  CHECK(eval("8/4/2") == 1.0);
  CHECK(eval("2*-x", 3.0) == -6.0);
  CHECK(eval("1.5e2 + .5") == 150.5);
}

TEST_CASE("parse: functions and pi") {
  CHECK(eval("sin(pi/2)") == 1.0);
  CHECK(eval("cos(0)+exp(0)") == 2.0);
  CHECK(eval("tanh(0)+sigmoid(0)") == 0.5);
  CHECK(eval("0.5*sin(3*x)*cos(t)", std::numbers::pi / 6, 0.0) == doctest::Approx(0.5));
  CHECK(eval("sin(3*x)*cos(t)^2+3", std::numbers::pi / 6, 0.0) == doctest::Approx(4.0));
}

TEST_CASE("parse: constant sub-expressions are folded") {
  ad::Graph g;
  SymbolTable s{{"u", g.variable("u", 2.0)}};
  const ad::Expr e = parse_expression("u^(-1/2)", g, s);
  CHECK(g.evaluate(e) == doctest::Approx(1.0 / std::sqrt(2.0)));
  // Exponent folded to a literal, so the x-derivative transform accepts it.
  const ad::Expr x = g.variable("x", 1.0);
  SymbolTable sx{{"x", x}};
  const ad::Expr f = parse_expression("x^(2*1.5)", g, sx);
  const std::vector<ad::Expr> outs{f};
  CHECK_NOTHROW(ad::input_jet(g, outs, x, ad::Expr{}, ad::JetOrders{true, true, false}));
}

TEST_CASE("parse: errors carry the column") {
  ad::Graph g;
  SymbolTable s{{"x", g.variable("x")}};
  try {
    parse_expression("1 + y", g, s);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.column() == 4);
    CHECK(std::string(e.what()).find("'y'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("log(x)", g, s), ParseError);
  CHECK_THROWS_AS(parse_expression("(x", g, s), ParseError);
  CHECK_THROWS_AS(parse_expression("x x", g, s), ParseError);
  CHECK_THROWS_AS(parse_expression("", g, s), ParseError);
}

TEST_CASE("expression_symbols lists free names only") {
  const auto names = expression_symbols("u_t - 0.01*u*u_xx + P1*u^3 - P1^3 + sin(pi*x)");
  CHECK(names == std::set<std::string>{"P1", "u", "u_t", "u_xx", "x"});
}

TEST_CASE("field function: jets against closed forms") {
  const FieldFunction e("0.4*sin(2*x)+1.4");
  const auto j = e.jet(0.3);
  CHECK(j.value == doctest::Approx(0.4 * std::sin(0.6) + 1.4).epsilon(1e-15));
  CHECK(j.dx == doctest::Approx(0.8 * std::cos(0.6)).epsilon(1e-15));
  CHECK(j.dxx == doctest::Approx(-1.6 * std::sin(0.6)).epsilon(1e-15));
  CHECK(j.dt == 0.0);

  const FieldFunction k("sin(3*x)*cos(t)^2+3");
  const auto jk = k.jet(0.2, 0.4);
  CHECK(jk.dt == doctest::Approx(-2.0 * std::sin(0.6) * std::cos(0.4) * std::sin(0.4)).epsilon(1e-14));

  const FieldFunction c(2.5);
  CHECK(c(7.0, 1.0) == 2.5);
  CHECK(c.jet(1.0).dx == 0.0);
}

TEST_CASE("field function: batch jets equal point jets") {
  const FieldFunction f("cos(3.8*x)*exp(-t)+x^2");
  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(17, -1.0, 1.0);
  Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(17, 0.0, 1.0);
  const auto b = f.jet(x, t);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const auto p = f.jet(x(i), t(i));
    CHECK(b.value(i) == p.value);
    CHECK(b.dx(i) == p.dx);
    CHECK(b.dxx(i) == p.dxx);
    CHECK(b.dt(i) == p.dt);
  }
}

TEST_CASE("field function: unknown symbol is rejected at construction") {
  CHECK_THROWS_AS(FieldFunction("x + k"), ParseError);
}
