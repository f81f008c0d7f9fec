#include <cmath>
#include <random>

#include "doctest.h"
#include "ipinn/error.hpp"
#include "ipinn/uncertainty.hpp"

using namespace ipinn;

namespace {

double toy(std::span<const double> x) { return x[0] * (2.0 - x[0]); }

}  // namespace

TEST_CASE("interval: checked construction") {
  CHECK(Interval::make(0.5, 2.0).width() == 1.5);
  CHECK(Interval::make(1.0, 1.0).width() == 0.0);
  CHECK_THROWS_AS(Interval::make(2.0, 1.0), InvalidBoundsError);
  CHECK_THROWS_AS(Interval::make(std::nan(""), 1.0), InvalidBoundsError);
}

TEST_CASE("linspace: endpoints exact") {
  const auto v = linspace({0.0, 2.0}, 200);
  CHECK(v.front() == 0.0);
  CHECK(v.back() == 2.0);
  CHECK(v[1] == doctest::Approx(2.0 / 199.0).epsilon(1e-15));
  CHECK(linspace({0.0, 1.0}, 2) == std::vector<double>{0.0, 1.0});
}

TEST_CASE("membership: triangular(0.5, 1, 2)") {
  const FuzzyNumber f = FuzzyNumber::triangular(0.5, 1.0, 2.0);
  CHECK(membership(f, 1.0) == 1.0);
  CHECK(membership(f, 0.5) == 0.0);
  CHECK(membership(f, 0.75) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(membership(f, 1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(membership(f, 3.0) == 0.0);
}

TEST_CASE("membership: trapezoidal plateau and gaussian truncation") {
  const FuzzyNumber t = FuzzyNumber::trapezoidal(0.0, 1.0, 2.0, 4.0);
  CHECK(membership(t, 1.5) == 1.0);
  CHECK(membership(t, 3.0) == 0.5);
  const FuzzyNumber g = FuzzyNumber::gaussian(1.0, 0.5);
  CHECK(membership(g, 1.0) == 1.0);
  CHECK(membership(g, 1.5) == doctest::Approx(std::exp(-0.5)));
  CHECK(membership(g, 2.6) == 0.0);
  CHECK(g.support() == Interval{-0.5, 2.5});
}

TEST_CASE("alpha_cut: triangular(0.5, 1, 2)") {
  const FuzzyNumber f = FuzzyNumber::triangular(0.5, 1.0, 2.0);
  CHECK(alpha_cut(f, 0.0) == Interval{0.5, 2.0});
  CHECK(alpha_cut(f, 1.0) == Interval{1.0, 1.0});
  CHECK(alpha_cut(f, 0.5) == Interval{0.75, 1.5});
  CHECK_THROWS_AS(alpha_cut(f, 1.5), ContractError);
  CHECK_THROWS_AS(alpha_cut(f, -0.1), ContractError);
}

TEST_CASE("alpha_cut: gaussian inverts the membership") {
  const FuzzyNumber g = FuzzyNumber::gaussian(0.0, 2.0, 3.0);
  const Interval c = alpha_cut(g, 0.3);
  CHECK(membership(g, c.upper) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(c.lower == -c.upper);
  CHECK(alpha_cut(g, 1e-6) == Interval{-6.0, 6.0});
}

TEST_CASE("alpha_level_optimize: toy function") {
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(0.5, 1.0, 2.0)};
  const std::vector<double> levels{0.0, 0.5, 1.0};
  const auto r = alpha_level_optimize(toy, in, levels, 10001);
  REQUIRE(r.size() == 3);
  // x = 1 sits a third of a grid step from the nearest node: error (h/3)^2.
  CHECK(std::abs(r[0].output.lower - 0.0) < 1e-12);
  CHECK(std::abs(r[0].output.upper - 1.0) < 1e-8);
  CHECK(r[0].minimum.point[0] == 2.0);
  CHECK(std::abs(r[0].maximum.point[0] - 1.0) < 1e-4);
  CHECK(std::abs(r[1].output.lower - 0.75) < 1e-12);
  CHECK(std::abs(r[1].output.upper - 1.0) < 1e-8);
  CHECK(r[2].output == Interval{1.0, 1.0});
}

TEST_CASE("alpha_level_optimize: toy cuts at the five fuzzy levels") {
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(0.5, 1.0, 2.0)};
  const std::vector<double> levels{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> lower{0.0, 0.4375, 0.75, 0.9375, 1.0};
  const auto r = alpha_level_optimize(toy, in, levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    CHECK(r[i].output.lower == doctest::Approx(lower[i]).epsilon(1e-12));
    CHECK(std::abs(r[i].output.upper - 1.0) < 1e-6);
  }
}

TEST_CASE("alpha_level_optimize: two inputs and odometer coverage") {
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(-1.0, 0.0, 1.0),
                                    FuzzyNumber::trapezoidal(1.0, 2.0, 3.0, 4.0)};
  int calls = 0;
  const ScalarObjective f = [&](std::span<const double> p) {
    ++calls;
    return p[0] * p[1];
  };
  const std::vector<double> levels{0.0};
  const auto r = alpha_level_optimize(f, in, levels, 11);
  CHECK(calls == 121);
  CHECK(r[0].output == Interval{-4.0, 4.0});
  CHECK(r[0].minimum.point == std::vector<double>{-1.0, 4.0});
}

TEST_CASE("alpha_level_optimize: non-finite objective names the point") {
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(-1.0, 0.0, 1.0)};
  const std::vector<double> levels{0.0};
  const ScalarObjective f = [](std::span<const double> p) { return 1.0 / p[0]; };
  try {
    alpha_level_optimize(f, in, levels, 3);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("(0)") != std::string::npos);
  }
  CHECK_THROWS_AS(alpha_level_optimize(toy, in, levels, 1), ContractError);
}

TEST_CASE("property: cuts are nested and round-trip through membership") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = u(rng) * 4 - 2, b = a + u(rng), c = b + u(rng), d = c + u(rng);
    const FuzzyNumber fs[] = {FuzzyNumber::triangular(a, b, d), FuzzyNumber::trapezoidal(a, b, c, d),
                              FuzzyNumber::gaussian(b, 0.1 + u(rng))};
    for (const FuzzyNumber& f : fs) {
      double a1 = u(rng), a2 = u(rng);
      if (a1 > a2) std::swap(a1, a2);
      const Interval outer = alpha_cut(f, a1), inner = alpha_cut(f, a2);
      CHECK(outer.contains(inner));
      for (int k = 1; k < 10; ++k) {
        const double x = inner.lower + inner.width() * k / 10.0;
        CHECK(membership(f, x) >= a2 - 1e-12);
      }
    }
  }
}

TEST_CASE("property: optimized outputs nest across levels for random polynomials") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(-1.0, 0.2, 1.5),
                                    FuzzyNumber::gaussian(0.0, 0.4)};
  const std::vector<double> levels{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    double c[6];
    for (double& v : c) v = u(rng);
    const ScalarObjective f = [&](std::span<const double> p) {
      return c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[1] + c[4] * p[0] * p[0] * p[0] +
             c[5] * p[1] * p[1];
    };
    // Cut grids are not nested, so an interior extremum may be missed by up
    // to |f''| h^2 / 8 on the coarser level.
    const auto r = alpha_level_optimize(f, in, levels, 401);
    for (std::size_t i = 1; i < r.size(); ++i) {
      CHECK(r[i - 1].output.contains(r[i].output, 1e-4));
    }
  }
}

TEST_CASE("property: refinement moves endpoints monotonically toward the limit") {
  // Grids 10*2^k + 1 are nested, so each refinement can only widen the
  // output, and the distance to the finest result never grows.
  const std::vector<FuzzyNumber> in{FuzzyNumber::triangular(0.0, 0.4, 2.0)};
  const std::vector<double> levels{0.0};
  const ScalarObjective f = [](std::span<const double> p) { return std::sin(3.0 * p[0]) + 0.3 * p[0]; };
  std::vector<Interval> out;
  for (int grid : {11, 21, 41, 81, 161, 321, 641, 1281}) {
    out.push_back(alpha_level_optimize(f, in, levels, grid)[0].output);
  }
  const Interval finest = out.back();
  double prev = INFINITY;
  for (std::size_t i = 0; i + 1 < out.size(); ++i) {
    CHECK(out[i + 1].contains(out[i]));
    const double gap = std::max(out[i].lower - finest.lower, finest.upper - out[i].upper);
    CHECK(gap <= prev);
    prev = gap;
  }
  // The last refinement moved less than max|f''| h^2 / 8 with h = 2/640.
  const Interval previous = out[out.size() - 2];
  CHECK(std::max(previous.lower - finest.lower, finest.upper - previous.upper) <
        9.0 * std::pow(2.0 / 640.0, 2) / 8.0);
}

TEST_CASE("interval field: registration samples the bounds") {
  CHECK_NOTHROW(IntervalField::checked(FieldFunction("0.5*sin(x)+0.55"),
                                       FieldFunction("0.4*sin(2*x)+1.4"), {0, 2}, std::nullopt));
  CHECK_NOTHROW(IntervalField::checked(FieldFunction("0.5*sin(3*x)*cos(t)"),
                                       FieldFunction("sin(3*x)*cos(t)^2+3"), {-1, 1},
                                       Interval{0, 1}));
  try {
    IntervalField::checked(FieldFunction("x"), FieldFunction(0.5), {0, 1}, std::nullopt);
    FAIL("expected InvalidBoundsError");
  } catch (const InvalidBoundsError& e) {
    CHECK(std::string(e.what()).find("x=") != std::string::npos);
  }
  const IntervalField f(FieldFunction("cos(3*x)+2"), FieldFunction("cos(3.8*x)+3"));
  CHECK(f.at(0.0) == Interval{3.0, 4.0});
}

TEST_CASE("fuzzy field: uniform and tabulated cuts nest") {
  const FuzzyField u = FuzzyField::uniform(FuzzyNumber::triangular(0.5, 1.0, 2.0));
  CHECK(u.cut(0.5).at(0.3) == Interval{0.75, 1.5});
  const std::vector<double> levels{0.0, 0.5, 1.0};
  CHECK(u.nested(levels, {0, 1}, std::nullopt));

  std::vector<std::pair<double, IntervalField>> cuts;
  cuts.emplace_back(0.0, IntervalField(FieldFunction("1-x"), FieldFunction("2+x")));
  cuts.emplace_back(1.0, IntervalField(FieldFunction(1.0), FieldFunction(2.0)));
  const FuzzyField t = FuzzyField::tabulated(std::move(cuts));
  const Interval mid = t.cut(0.5).at(0.4);
  CHECK(mid.lower == doctest::Approx(0.8));
  CHECK(mid.upper == doctest::Approx(2.2));
  CHECK(t.nested(std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}, {0, 1}, std::nullopt));

  std::vector<std::pair<double, IntervalField>> bad;
  bad.emplace_back(0.0, IntervalField(FieldFunction(1.0), FieldFunction(2.0)));
  bad.emplace_back(1.0, IntervalField(FieldFunction(0.0), FieldFunction(3.0)));
  CHECK_FALSE(FuzzyField::tabulated(std::move(bad)).nested(std::vector<double>{0.0, 1.0}, {0, 1},
                                                           std::nullopt));
}
