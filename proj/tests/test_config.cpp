#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "warpspec/config.hpp"
#include "warpspec/warp.hpp"

using namespace warpspec;
using Catch::Approx;

namespace {

const char* kMinimal = R"(
version = 1

[output]
dir = "results"
formats = ["json"]

[[scenario]]
name = "demo"
n = 3
p = 1.5
r0 = 0.8
kappa_g = { kind = "constant", k = -1.0 }
kappa_minus = { kind = "constant", k = -1.5 }
kappa_plus = { kind = "constant", k = -0.5 }
phi = { kind = "quadratic", k = 1 }
t_grid = [0.1, 0.5]
K = 12
grid = { h = 0.0, nodes = 1024 }
tolerances = { eig_tol = 1e-5, kernel_tol = 1e-3, bound_tol = 1e-9 }
)";

}  // namespace

TEST_CASE("full scenario block parses") {
  auto cfg = parse_config(kMinimal);
  CHECK(cfg.version == 1);
  CHECK(cfg.output.dir == "results");
  CHECK(cfg.output.json);
  CHECK_FALSE(cfg.output.csv);
  REQUIRE(cfg.scenarios.size() == 1);
  const auto& sc = cfg.scenarios[0];
  CHECK(sc.name == "demo");
  CHECK(sc.n == 3);
  CHECK(sc.p == 1.5);
  CHECK(sc.r0 == 0.8);
  CHECK(sc.kernel_modes == 12);
  CHECK(sc.nodes == 1024);
  CHECK(sc.tolerances.eig_tol == 1e-5);
  CHECK(sc.g_profile.eval(0.3) == -1.0);
  CHECK(sc.potential.phi(0.5) == Approx(0.25));
  CHECK(sc.t_grid == std::vector<double>{0.1, 0.5});
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config("version = 1\nbogus = 2\n"), config_error);
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "x"
n = 2
r0 = 1.0
typo_key = 3
kappa_g = { kind = "constant", k = 0.0 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
)"),
                  config_error);
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "x"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", k = 0.0, extra = 1 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
)"),
                  config_error);
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "x"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", k = 0.0 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
tolerances = { eig_tol = 1e-6, oops = 1 }
)"),
                  config_error);
}

TEST_CASE("version gate") {
  CHECK_THROWS_AS(parse_config("version = 2\n"), config_error);
  CHECK_THROWS_AS(parse_config(""), config_error);
}

TEST_CASE("strict value validation") {
  // zero in t_grid
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "x"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", k = 0.0 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
t_grid = [0.0, 0.1]
)"),
                  config_error);
  // duplicate scenario names
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "dup"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", k = 0.0 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
[[scenario]]
name = "dup"
n = 2
r0 = 1.0
kappa_g = { kind = "constant", k = 0.0 }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
)"),
                  config_error);
  // duplicate keys inside a table
  CHECK_THROWS_AS(parse_config("version = 1\nversion = 1\n"), config_error);
}

TEST_CASE("tabulated profiles parse from multi-line arrays") {
  auto cfg = parse_config(R"(
version = 1
[[scenario]]
name = "tab"
n = 2
r0 = 0.5
kappa_g = { kind = "tabulated",
  s = [0.0, 0.3,
       0.6, 1.0],
  values = [0.1, 0.2, 0.15, 0.0] }
kappa_minus = { kind = "constant", k = -0.5 }
kappa_plus = { kind = "constant", k = 0.5 }
phi = { kind = "hyperbolic_log" }
)");
  const auto& sc = cfg.scenarios.at(0);
  CHECK(sc.g_profile.eval(0.3) == Approx(0.2));
  CHECK(sc.g_profile.s_max() == 1.0);
}

TEST_CASE("profile domains must cover the solve span") {
  CHECK_THROWS_AS(parse_config(R"(
version = 1
[[scenario]]
name = "short"
n = 2
r0 = 1.0
kappa_g = { kind = "tabulated", s = [0.0, 0.5], values = [0.0, 0.0] }
kappa_minus = { kind = "constant", k = 0.0 }
kappa_plus = { kind = "constant", k = 0.0 }
phi = { kind = "constant", c = 0.0 }
)"),
                  config_error);
}

TEST_CASE("comments, strings and booleans parse") {
  auto cfg = parse_config(R"(
# leading comment
version = 1   # trailing comment

[output]
dir = "a b/c"  # spaces in strings
)");
  CHECK(cfg.output.dir == "a b/c");
}

TEST_CASE("scenario lookup by name") {
  auto cfg = parse_config(kMinimal);
  CHECK(cfg.scenario("demo").n == 3);
  CHECK_THROWS_AS(cfg.scenario("missing"), config_error);
}

TEST_CASE("the shipped suite loads and covers the advertised matrix") {
  auto cfg = load_config(std::string(WARPSPEC_SCENARIO_DIR) + "/suite.toml");
  CHECK(cfg.scenarios.size() >= 12);
  std::set<int> dims;
  std::set<double> ps;
  bool has_tabulated_like = false, has_hyplog = false, has_expanding = false;
  for (const auto& sc : cfg.scenarios) {
    dims.insert(sc.n);
    ps.insert(sc.p);
    if (!sc.g_profile.is_constant()) has_tabulated_like = true;
    if (sc.potential.kind() == Potential::Kind::hyperbolic_log)
      has_hyplog = true;
    if (sc.potential.kind() == Potential::Kind::quadratic &&
        sc.potential.phi(1.0) < 0)
      has_expanding = true;
    CHECK(validate_bounds(sc).empty());
  }
  CHECK(dims == std::set<int>{2, 3, 4});
  CHECK(ps == std::set<double>{1.5, 2.0, 3.0});
  CHECK(has_tabulated_like);
  CHECK(has_hyplog);
  CHECK(has_expanding);
}

TEST_CASE("serialization is deterministic") {
  auto w = solve_warping(CurvatureProfile::constant(1.0), 2, 4.0, 4.0 / 512);
  std::ostringstream a, b;
  write_warping_csv(a, w);
  write_warping_csv(b, w);
  CHECK(a.str() == b.str());
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(5.783185962946783) == "5.783185962946783");
}
