#include "doctest.h"
#include "ipinn/checks.hpp"

using namespace ipinn::checks;

TEST_CASE("relative error floors the denominator at 1") {
  CHECK(relative_error(2.0, 2.0) == 0.0);
  CHECK(relative_error(1e-9, 2e-9) == doctest::Approx(1e-9));
  CHECK(relative_error(100.0, 101.0) == doctest::Approx(1.0 / 101.0));
}

TEST_CASE("autodiff suite passes on 100 random graphs") {
  const auto results = autodiff_suite();
  REQUIRE(results.size() == 2);
  for (const CheckResult& r : results) {
    INFO(r.suite << " max error " << r.max_error << " rejected " << r.rejected);
    CHECK(r.cases == 200);
    CHECK(r.pass);
    CHECK(r.seconds < 30.0);
    CHECK(r.rejected < 10);
  }
}

TEST_CASE("autodiff suite catches a perturbed derivative rule") {
  AutodiffOptions o;
  o.inject_gradient_bug = true;
  const auto results = autodiff_suite(o);
  CHECK(!results[0].pass);
  CHECK(!results[1].pass);
}

TEST_CASE("suite is deterministic in its seed") {
  AutodiffOptions o;
  o.graphs = 20;
  CHECK(autodiff_suite(o)[0].max_error == autodiff_suite(o)[0].max_error);
}

TEST_CASE("fem convergence study") {
  const CheckResult r = fem_convergence();
  CHECK(r.pass);
  CHECK(r.max_error == doctest::Approx(4.0).epsilon(0.01));
  CHECK(r.seconds < 10.0);
}
