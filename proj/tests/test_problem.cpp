#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "ipinn/error.hpp"
#include "ipinn/problem.hpp"

using namespace ipinn;

namespace {

BranchState state(double u, std::vector<double> fields) {
  BranchState s;
  s.u = {u};
  s.fields = std::move(fields);
  return s;
}

}  // namespace

TEST_CASE("registry lists the four benchmarks") {
  const auto names = builtin_names();
  CHECK(names == std::vector<std::string>{"toy-interval", "toy-fuzzy", "bar-1d", "nonlinear-pde"});
  for (const std::string& n : names) {
    if (is_fuzzy_builtin(n)) {
      CHECK_NOTHROW(builtin_fuzzy_problem(n).at(0.5).validate());
      CHECK_THROWS_AS(builtin_problem(n), ConfigError);
    } else {
      CHECK_NOTHROW(builtin_problem(n).validate());
    }
  }
  CHECK_THROWS_AS(builtin_problem("heat"), ConfigError);
}

TEST_CASE("toy: shape, bounds and residual zeros") {
  const ProblemDefinition p = builtin_toy_interval();
  CHECK(p.residual_size() == 1);
  CHECK(p.components == 1);
  CHECK(p.field_count() == 1);
  CHECK(p.fields[0].bounds.at(1.0) == Interval{0.5, 2.0});
  CHECK(p.fields[0].bounds.at(123.0) == Interval{0.5, 2.0});
  CHECK(residual(p, state(1.0, {1.0}), 1.0)[0] == 0.0);
  CHECK(residual(p, state(0.0, {2.0}), 1.0)[0] == 0.0);
  CHECK(residual(p, state(0.5, {1.0}), 1.0)[0] == -0.5);
  CHECK(p.input_width() == 1);
  CHECK(p.input_layout().x_row == -1);
}

TEST_CASE("bar: bound values at x=0 and load") {
  const ProblemDefinition p = builtin_bar_1d();
  CHECK(p.fields[0].bounds.at(0.0) == Interval{0.55, 1.4});
  CHECK(p.fields[1].bounds.at(0.0) == Interval{3.0, 4.0});
  // With u = 0 the residual is the load n(x) = x cos(3x).
  BranchState s = state(0.0, {1.0, 1.0});
  s.u_x = {0.0};
  s.u_xx = {0.0};
  s.fields_x = {0.0, 0.0};
  CHECK(residual(p, s, 0.0)[0] == 0.0);
  CHECK(residual(p, s, 0.7)[0] == doctest::Approx(0.7 * std::cos(2.1)).epsilon(1e-15));
  const DerivativeNeeds n = p.needs();
  CHECK(n.u_x);
  CHECK(n.u_xx);
  CHECK_FALSE(n.u_t);
  CHECK(n.field_x);
  CHECK_FALSE(n.field_t);
}

TEST_CASE("bar: manufactured solution with unit stiffness") {
  // u'' = -x cos(3x) for u = x cos(3x)/9 - 2 sin(3x)/27.
  const ProblemDefinition p = builtin_bar_1d();
  for (double x : {0.0, 0.3, 1.1, 2.0}) {
    BranchState s = state(x * std::cos(3 * x) / 9 - 2 * std::sin(3 * x) / 27, {1.0, 1.0});
    s.u_x = {-std::cos(3 * x) / 9 - x * std::sin(3 * x) / 3};
    s.u_xx = {-x * std::cos(3 * x)};
    s.fields_x = {0.0, 0.0};
    CHECK(std::abs(residual(p, s, x)[0]) < 1e-15);
  }
}

TEST_CASE("bar: manufactured solution with varying fields") {
  // u = sin(x), E = 1 + x^2, A = 2 + cos(x): G = (EA u')' + x cos(3x).
  const ProblemDefinition p = builtin_bar_1d();
  for (double x : {0.1, 0.9, 1.7}) {
    const double E = 1 + x * x, Ex = 2 * x, A = 2 + std::cos(x), Ax = -std::sin(x);
    const double ux = std::cos(x), uxx = -std::sin(x);
    const double expected = (Ex * A + E * Ax) * ux + E * A * uxx + x * std::cos(3 * x);
    BranchState s = state(std::sin(x), {E, A});
    s.u_x = {ux};
    s.u_xx = {uxx};
    s.fields_x = {Ex, Ax};
    CHECK(residual(p, s, x)[0] == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("nonlinear pde: bounds, initial data and residual") {
  const ProblemDefinition p = builtin_nonlinear_pde();
  const double x = std::numbers::pi / 6;
  CHECK(p.fields[0].bounds.upper()(x, 0.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(p.fields[0].bounds.lower()(x, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(FieldFunction(p.initial[0].value)(0.0) == 1.0);
  CHECK(FieldFunction(p.initial[0].value)(1.0) == 0.0);

  BranchState s = state(0.0, {1.7});
  s.u_t = {0.0};
  s.u_xx = {0.0};
  CHECK(residual(p, s, 0.2, 0.4)[0] == doctest::Approx(-1.7 * 1.7 * 1.7).epsilon(1e-15));

  // u = (1 - x^2) e^{-t}: every term by hand.
  const double xv = 0.35, t = 0.6, k = 2.2;
  const double u = (1 - xv * xv) * std::exp(-t), ut = -u, uxx = -2 * std::exp(-t);
  s = state(u, {k});
  s.u_t = {ut};
  s.u_xx = {uxx};
  const double expected = ut - 0.01 * u * uxx + k * u * u * u - k * k * k;
  CHECK(residual(p, s, xv, t)[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(p.input_width() == 2);
}

TEST_CASE("residual: missing derivative is a contract error") {
  const ProblemDefinition p = builtin_nonlinear_pde();
  BranchState s = state(0.3, {1.0});
  s.u_xx = {0.0};
  CHECK_THROWS_AS(residual(p, s, 0.0, 0.0), ContractError);
}

TEST_CASE("residual: branch tag does not enter the operator") {
  const ProblemDefinition p = builtin_bar_1d();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int i = 0; i < 20; ++i) {
    BranchState a = state(u(rng), {u(rng), u(rng)});
    a.u_x = {u(rng)};
    a.u_xx = {u(rng)};
    a.fields_x = {u(rng), u(rng)};
    BranchState b = state(u(rng), {u(rng), u(rng)});
    b.u_x = {u(rng)};
    b.u_xx = {u(rng)};
    b.fields_x = {u(rng), u(rng)};
    b.branch = Branch::Max;
    const double x = u(rng);
    const double ga = residual(p, a, x)[0], gb = residual(p, b, x)[0];
    std::swap(a, b);
    std::swap(a.branch, b.branch);
    CHECK(residual(p, a, x)[0] == gb);
    CHECK(residual(p, b, x)[0] == ga);
  }
}

TEST_CASE("built-in bounds hold on the 512-point grid") {
  for (const char* name : {"toy-interval", "bar-1d", "nonlinear-pde"}) {
    const ProblemDefinition p = builtin_problem(name);
    for (const FieldSpec& f : p.fields) {
      CHECK_NOTHROW(f.bounds.validate(p.space, p.time, 512));
    }
  }
}

TEST_CASE("validation catches bad definitions") {
  ProblemDefinition p = builtin_bar_1d();
  p.residual = {"u_xx + q"};
  CHECK_THROWS_AS(p.validate(), ParseError);

  p = builtin_bar_1d();
  p.boundary[1].location = 1.5;
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = builtin_bar_1d();
  p.initial.push_back({"0", 0});
  CHECK_THROWS_AS(p.validate(), ContractError);

  p = builtin_bar_1d();
  p.fields[1].bounds = IntervalField(FieldFunction("cos(3*x) + 3.5"), FieldFunction("cos(3.8*x) + 3"));
  CHECK_THROWS_AS(p.validate(), InvalidBoundsError);
}

TEST_CASE("custom problems: several components and field aliases") {
  ProblemDefinition p;
  p.name = "pair";
  p.space = {0.0, 1.0};
  p.components = 2;
  p.fields.push_back({"c", IntervalField(FieldFunction(1.0), FieldFunction(2.0))});
  p.residual = {"u1_xx - c*u2", "u2 - P1_x - u1"};
  p.boundary.push_back({0.0, BoundaryKind::Value, "0", 1});
  CHECK_NOTHROW(p.validate());
  BranchState s;
  s.u = {1.0, 3.0};
  s.u_xx = {4.0, std::nullopt};
  s.fields = {1.5};
  s.fields_x = {0.25};
  const auto g = residual(p, s, 0.5);
  CHECK(g == std::vector<double>{4.0 - 4.5, 3.0 - 0.25 - 1.0});
  CHECK(p.needs().field_x);
  CHECK_FALSE(p.needs().u_x);
}

TEST_CASE("squared terms: batch values and symbol adjoints") {
  const ProblemDefinition p = builtin_nonlinear_pde();
  SquaredTerms g(p, p.residual, "residual");
  const SymbolLayout& L = g.layout();
  CHECK(g.uses(L.u(0)));
  CHECK(g.uses(L.u_t(0)));
  CHECK_FALSE(g.uses(L.u_x(0)));
  CHECK_FALSE(g.uses(SymbolLayout::x()));

  Eigen::ArrayXXd in = Eigen::ArrayXXd::Zero(3, L.size());
  in.col(L.u(0)) << 0.0, 0.5, -1.0;
  in.col(L.u_t(0)) << 0.1, 0.2, 0.3;
  in.col(L.u_xx(0)) << 1.0, -2.0, 0.5;
  in.col(L.field(0)) << 1.0, 2.0, 0.5;
  const Eigen::ArrayXd sums = g.forward(in);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double u = in(i, L.u(0)), k = in(i, L.field(0));
    const double r = in(i, L.u_t(0)) - 0.01 * u * in(i, L.u_xx(0)) + k * u * u * u - k * k * k;
    CHECK(g.value(0)(i) == doctest::Approx(r).epsilon(1e-15));
    CHECK(sums(i) == doctest::Approx(r * r).epsilon(1e-15));
  }
  const Eigen::ArrayXXd& adj = g.backward(Eigen::ArrayXd::Ones(3));
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double u = in(i, L.u(0)), k = in(i, L.field(0)), uxx = in(i, L.u_xx(0));
    const double r = g.value(0)(i);
    CHECK(adj(i, L.u(0)) == doctest::Approx(2 * r * (-0.01 * uxx + 3 * k * u * u)).epsilon(1e-14));
    CHECK(adj(i, L.field(0)) == doctest::Approx(2 * r * (u * u * u - 3 * k * k)).epsilon(1e-14));
    CHECK(adj(i, L.u_t(0)) == doctest::Approx(2 * r).epsilon(1e-14));
    CHECK(adj(i, L.u_x(0)) == 0.0);
  }
}

TEST_CASE("squared terms: non-finite value names the term and point") {
  ProblemDefinition p = builtin_bar_1d();
  SquaredTerms bc(p, {"u_x - 0.1/(E*A)"}, "boundary x=2");
  const SymbolLayout& L = bc.layout();
  Eigen::ArrayXXd in = Eigen::ArrayXXd::Ones(2, L.size());
  in(1, L.field(0)) = 0.0;
  in(1, SymbolLayout::x()) = 2.0;
  try {
    bc.forward(in);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("boundary x=2") != std::string::npos);
    CHECK(msg.find("x=2") != std::string::npos);
    CHECK(e.lane() == 1);
  }
}

TEST_CASE("toy-fuzzy: cuts become interval problems") {
  const FuzzyProblem f = builtin_toy_fuzzy();
  CHECK(f.levels == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(f.at(0.0).fields[0].bounds.at(1.0) == Interval{0.5, 2.0});
  CHECK(f.at(0.5).fields[0].bounds.at(1.0) == Interval{0.75, 1.5});
  CHECK(f.at(1.0).fields[0].bounds.at(1.0) == Interval{1.0, 1.0});
  CHECK(f.at(0.25).residual == f.base.residual);
}
