#include <set>

#include "doctest.h"
#include "ipinn/fuzzy.hpp"

using namespace ipinn;

namespace {

TrainingConfig short_config(const ProblemDefinition& p, long epochs) {
  TrainingConfig c = TrainingConfig::defaults_for(p);
  c.epochs = epochs;
  c.log_every = 500;
  c.seed = 21;
  return c;
}

}  // namespace

TEST_CASE("schedule validation") {
  CHECK_NOTHROW(validate_schedule({0.0, 0.25, 0.5, 0.75, 1.0}));
  CHECK_THROWS_AS(validate_schedule({}), ConfigError);
  CHECK_THROWS_AS(validate_schedule({0.0, 0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(validate_schedule({0.5, 0.2}), ConfigError);
  CHECK_THROWS_AS(validate_schedule({0.0, 1.5}), ConfigError);
}

TEST_CASE("cut seeds are deterministic and distinct") {
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(cut_seed(7, i) == cut_seed(7, i));
    seen.insert(cut_seed(7, i));
  }
  CHECK(seen.size() == 16);
  CHECK(cut_seed(7, 0) != cut_seed(8, 0));
}

TEST_CASE("membership assembly") {
  SUBCASE("two cuts give a triangle peaking at 1") {
    const Membership m = assemble_membership({{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}});
    CHECK(m.nested);
    CHECK(m(0.0) == 0.0);
    CHECK(m(0.5) == doctest::Approx(0.5));
    CHECK(m(1.0) == 1.0);
    CHECK(m(1.1) == 0.0);
    CHECK(m(-0.1) == 0.0);
  }
  SUBCASE("a repeated interval is crisp") {
    const Membership m =
        assemble_membership({{0.0, 2.0, 3.0}, {0.5, 2.0, 3.0}, {1.0, 2.0, 3.0}});
    CHECK(m(2.0) == 1.0);
    CHECK(m(2.5) == 1.0);
    CHECK(m(3.0) == 1.0);
    CHECK(m(3.01) == 0.0);
  }
  SUBCASE("interpolates between cut endpoints on both sides") {
    const Membership m =
        assemble_membership({{0.0, 0.0, 1.0}, {0.5, 0.75, 1.0}, {1.0, 1.0, 1.0}});
    CHECK(m(0.375) == doctest::Approx(0.25));
    CHECK(m(0.875) == doctest::Approx(0.75));
  }
  SUBCASE("non-nested cuts are flagged, small drift is tolerated") {
    const Membership ok = assemble_membership({{0.0, 0.0, 1.0}, {1.0, -0.01, 1.01}});
    CHECK(ok.nested);
    const Membership bad = assemble_membership({{0.0, 0.0, 1.0}, {1.0, -0.1, 1.0}});
    CHECK(!bad.nested);
    CHECK(bad.warnings.size() == 1);
  }
  CHECK_THROWS_AS(assemble_membership({{0.0, 0.0, 1.0}}), ContractError);
}

TEST_CASE("fpinn: cuts train independently of the job count") {
  const FuzzyProblem toy = builtin_toy_fuzzy();
  const TrainingConfig c = short_config(toy.base, 1500);
  const FuzzySolution one = run_fpinn(toy, toy.levels, c, 1);
  const FuzzySolution many = run_fpinn(toy, toy.levels, c, 3);
  REQUIRE(one.complete());
  REQUIRE(many.complete());
  REQUIRE(one.cuts.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(one.cuts[i].alpha == toy.levels[i]);
    CHECK(one.cuts[i].bundle->u == many.cuts[i].bundle->u);
    CHECK(one.cuts[i].bundle->solution_params == many.cuts[i].bundle->solution_params);
  }
  // The degenerate top cut pins the realized field to the peak.
  const SolutionBundle& top = *one.cuts.back().bundle;
  CHECK(std::abs(top.fields(0, 0) - 1.0) < 1e-6);
  CHECK(std::abs(top.fields(1, 0) - 1.0) < 1e-6);
  CHECK(one.intervals().size() == 5);
}

TEST_CASE("fpinn: a failing cut is recorded and the rest still run") {
  FuzzyProblem p = builtin_toy_fuzzy();
  p.base.residual = {"u - P1*(2 - P1) + 1/(P1 - 1)"};  // infinite where P1 = 1
  const TrainingConfig c = short_config(p.base, 50);
  const FuzzySolution s = run_fpinn(p, {0.0, 1.0}, c, 2);
  CHECK(s.cuts[0].bundle.has_value());
  CHECK(!s.cuts[1].bundle.has_value());
  CHECK(s.cuts[1].error.find("diverged") != std::string::npos);
  CHECK(!s.complete());
  CHECK(s.intervals().size() == 1);
}
