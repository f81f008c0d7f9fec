#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ipinn/io.hpp"

using namespace ipinn;
using namespace ipinn::io;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "ipinn_test_io" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string config_error(const std::string& text) {
  try {
    parse_run_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("doubles round-trip through their shortest form") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 123456789.125, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e5) == "1e+05");
}

TEST_CASE("solution header follows components and fields") {
  CHECK(solution_header(builtin_bar_1d()) ==
        std::vector<std::string>{"x", "t", "u_min", "u_max", "P1_min", "P1_max", "P2_min", "P2_max"});
  ProblemDefinition two = builtin_toy_interval();
  two.components = 2;
  CHECK(solution_header(two)[2] == "u1_min");
  CHECK(solution_header(two)[5] == "u2_max");
}

TEST_CASE("csv writers") {
  const fs::path d = scratch("csv");
  write_csv(d / "a.csv", {"a", "b"}, {{1.0, 0.25}, {2.0, -3.0}});
  CHECK(slurp(d / "a.csv") == "a,b\n1,2\n0.25,-3\n");
  CHECK_THROWS_AS(write_csv(d / "b.csv", {"a"}, {{1.0}, {2.0}}), ContractError);
  CHECK_THROWS_AS(write_csv(d / "b.csv", {"a", "b"}, {{1.0}, {2.0, 3.0}}), ContractError);

  LogEntry e;
  e.epoch = 100;
  e.loss = {1.5, 0.5, -1.0, 2.0, 0.0, 0.25};
  write_log_csv(d / "log.csv", {e});
  CHECK(slurp(d / "log.csv") ==
        "epoch,total,mse_g,u_mm_min,u_mm_max,mse_0,mse_u,box_violations\n100,1.5,0.5,-1,2,0,0.25,0\n");
}

TEST_CASE("parameter files round-trip exactly") {
  const ProblemDefinition p = builtin_bar_1d();
  TrainingConfig c = TrainingConfig::defaults_for(p);
  c.seed = 5;
  const auto [u, f] = initial_params(p, c);
  const fs::path d = scratch("params");
  write_params(d / "params.json", 42, u, f);
  const ParamsFile back = read_params(d / "params.json");
  CHECK(back.epoch == 42);
  CHECK(back.solution == u);
  CHECK(back.field == f);
}

TEST_CASE("built-in configs carry the published settings") {
  const RunConfig bar = parse_run_config(R"J({"problem": "bar-1d"})J");
  CHECK(bar.training.solution_net == NetworkShape{4, 40});
  CHECK(bar.training.field_net == NetworkShape{5, 50});
  CHECK(bar.training.learning_rate == 1e-4);
  CHECK(bar.output == fs::path("runs/bar-1d"));
  CHECK(!bar.is_fuzzy());

  const RunConfig fz = parse_run_config(R"J({"problem": "toy-fuzzy", "alpha_levels": [0, 1], "jobs": 2})J");
  CHECK(fz.is_fuzzy());
  CHECK(fz.alpha_levels == std::vector<double>{0.0, 1.0});
  CHECK(fz.jobs == 2);
}

TEST_CASE("overrides and round trip through metadata") {
  const std::string text = R"J({
    "problem": "nonlinear-pde",
    "training": {"epochs": 10, "w_u": 3.5, "seed": 9, "normalize_umm": true},
    "networks": {"field": {"width": 12}},
    "output": "out/x"
  })J";
  const RunConfig c = parse_run_config(text);
  CHECK(c.training.epochs == 10);
  CHECK(c.training.w_u == 3.5);
  CHECK(c.training.w_0 == 1e5);
  CHECK(c.training.seed == 9);
  CHECK(c.training.normalize_umm);
  CHECK(c.training.field_net == NetworkShape{3, 12});

  const std::string meta = to_json(c, true);
  CHECK(meta.find("\"provenance\"") != std::string::npos);
  const RunConfig back = parse_run_config(meta);
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("inline problems") {
  const std::string text = R"J({
    "problem": {
      "name": "heat",
      "space": [0, 1], "time": [0, 0.5],
      "fields": [{"name": "a", "lower": 1, "upper": "2 + x"}],
      "residual": "u_t - a*u_xx",
      "boundary": [{"x": 0}, {"x": 1, "kind": "derivative", "target": "0"}],
      "initial": [{"value": "sin(pi*x)"}]
    },
    "training": {"space_points": 20, "time_points": 5}
  })J";
  const RunConfig c = parse_run_config(text);
  CHECK(c.problem_name == "heat");
  CHECK(c.problem.fields.size() == 1);
  CHECK(c.problem.boundary[1].kind == BoundaryKind::Derivative);
  CHECK(c.problem.fields[0].bounds.at(0.5).upper == doctest::Approx(2.5));
  CHECK(to_json(parse_run_config(to_json(c))) == to_json(c));

  const RunConfig fz = parse_run_config(R"J({
    "problem": {"space": [1, 1], "constant_input": true,
                "fields": [{"fuzzy": {"kind": "triangular", "parameters": [0.5, 1, 2]}}],
                "residual": ["u - P1*(2 - P1)"]},
    "alpha_levels": [0, 0.5, 1]
  })J");
  REQUIRE(fz.is_fuzzy());
  CHECK(fz.fuzzy->at(0.5).fields[0].bounds.at(1.0) == Interval{0.75, 1.5});
}

TEST_CASE("config diagnostics point at the offending key") {
  const std::string e1 = config_error("{\n  \"problem\": \"bar-1d\",\n  \"training\": {\n    \"epoch\": 5\n  }\n}");
  CHECK(e1.find("cfg.json:4:5") != std::string::npos);
  CHECK(e1.find("/training/epoch") != std::string::npos);
  CHECK(e1.find("unknown key") != std::string::npos);

  CHECK(config_error(R"J({"problem": "bar-1d", "colour": 1})J").find("/colour") != std::string::npos);
  CHECK(config_error(R"J({"problem": "nope"})J").find("unknown problem") != std::string::npos);
  CHECK(config_error(R"J({"training": {}})J").find("missing key 'problem'") != std::string::npos);
  CHECK(config_error(R"J({"problem": "bar-1d", "training": {"epochs": "many"}})J")
            .find("expected an integer") != std::string::npos);
  CHECK(config_error(R"J({"problem": "bar-1d", "training": {"learning_rate": -1}})J") != "");
  CHECK(config_error(R"J({"problem": "bar-1d", "alpha_levels": [0, 1]})J")
            .find("only fuzzy") != std::string::npos);
  CHECK(config_error(R"J({"problem": "toy-fuzzy", "alpha_levels": [0.5, 0.2]})J") != "");
  CHECK(config_error("{\n \"problem\": \"bar-1d\",,\n}").find("cfg.json:2:") != std::string::npos);
  CHECK(config_error(R"J({"problem": {"space": [0, 1], "residual": "u +", "fields": []}})J")
            .find("/problem") != std::string::npos);
  CHECK(config_error(R"J({"problem": {"space": [0, 1], "residual": "u", "fields": [{"lower": 2, "upper": 1}]}})J") != "");
}
