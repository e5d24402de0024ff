#include <doctest.h>

#include <string>

#include "kpp/config.hpp"
#include "kpp/errors.hpp"

using namespace kpp;

namespace {

void check_same(const RunConfig& a, const RunConfig& b) {
  CHECK(a.diffusion.kind == b.diffusion.kind);
  CHECK(a.diffusion.p == b.diffusion.p);
  CHECK(a.diffusion.alpha == b.diffusion.alpha);
  REQUIRE(a.diffusion.terms.size() == b.diffusion.terms.size());
  for (std::size_t i = 0; i < a.diffusion.terms.size(); ++i) {
    CHECK(a.diffusion.terms[i].weight == b.diffusion.terms[i].weight);
    CHECK(a.diffusion.terms[i].p == b.diffusion.terms[i].p);
  }
  CHECK(a.reaction.kind == b.reaction.kind);
  CHECK(a.reaction.mu == b.reaction.mu);
  CHECK(a.reaction.path == b.reaction.path);
  CHECK(a.solver.c_tol == b.solver.c_tol);
  CHECK(a.solver.z_tol == b.solver.z_tol);
  CHECK(a.solver.c_max == b.solver.c_max);
  CHECK(a.solver.integrator.rtol == b.solver.integrator.rtol);
  CHECK(a.solver.integrator.atol == b.solver.integrator.atol);
  CHECK(a.solver.integrator.max_nodes == b.solver.integrator.max_nodes);
  CHECK(a.profile.eta == b.profile.eta);
  CHECK(a.profile.n_samples == b.profile.n_samples);
  CHECK(a.grid.x_min == b.grid.x_min);
  CHECK(a.grid.x_max == b.grid.x_max);
  CHECK(a.grid.n == b.grid.n);
  CHECK(a.grid.geometry == b.grid.geometry);
  CHECK(a.grid.N == b.grid.N);
  CHECK(a.sim.epsilon == b.sim.epsilon);
  CHECK(a.sim.alpha == b.sim.alpha);
  CHECK(a.sim.t_end == b.sim.t_end);
  CHECK(a.sim.snapshot_stride == b.sim.snapshot_stride);
  CHECK(a.sim.fit_fraction == b.sim.fit_fraction);
  CHECK(a.sim.sample_interval == b.sim.sample_interval);
  CHECK(a.sim.center == b.sim.center);
  CHECK(a.sweep_epsilons == b.sweep_epsilons);
  CHECK(a.regularization_alphas == b.regularization_alphas);
  CHECK(a.output == b.output);
  CHECK(a.deterministic == b.deterministic);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("empty document gives the defaults") { check_same(parse_config(""), RunConfig{}); }

TEST_CASE("defaults survive a serialize/parse round trip") {
  const RunConfig defaults;
  const auto text = to_toml(defaults);
  check_same(parse_config(text), defaults);
  CHECK(to_toml(parse_config(text)) == text);
}

TEST_CASE("non-default values survive a round trip") {
  RunConfig c;
  c.diffusion.kind = "sum";
  c.diffusion.terms = {{1.0, 2.0}, {0.1, 3.5}};
  c.diffusion.alpha = 1e-3;
  c.reaction.kind = "tabulated";
  c.reaction.path = "data/f.csv";
  c.solver.c_tol = 1.0 / 3.0 * 1e-9;
  c.solver.integrator.max_nodes = 12345;
  c.profile.eta = 0.1 + 0.2;  // not exactly representable as written
  c.grid.geometry = "radial";
  c.grid.x_min = 0.0;
  c.grid.x_max = 100.0;
  c.grid.N = 3;
  c.sim.center = 20.0;
  c.sweep_epsilons = {1.0, 0.1};
  c.deterministic = false;
  check_same(parse_config(to_toml(c)), c);
}

TEST_CASE("inline tables and sections are equivalent") {
  const auto a = parse_config("diffusion = { kind = \"p_laplacian\", p = 3 }\n");
  const auto b = parse_config("[diffusion]\nkind = \"p_laplacian\"\np = 3.0\n");
  CHECK(a.diffusion.p == 3.0);
  check_same(a, b);
  const auto s = parse_config("diffusion = { kind = \"sum\", terms = [[1, 2], [1, 3]] }\n");
  REQUIRE(s.diffusion.terms.size() == 2);
  CHECK(s.diffusion.build().g(2.0) == doctest::Approx(6.0));
}

TEST_CASE("unknown keys fail closed with context") {
  const auto msg = error_of("reaction = { kind = \"double_well\", mu = -0.25 }\n"
                            "diffusoin = { kind = \"p_laplacian\", p = 2.0 }\n");
  CHECK(msg.find("diffusoin") != std::string::npos);
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("unknown key") != std::string::npos);
  CHECK(error_of("[sim]\nt_ned = 3\n").find("sim.t_ned") != std::string::npos);
  CHECK(error_of("solver = { rtol = 1e-9, c_tolerance = 1 }").find("solver.c_tolerance") !=
        std::string::npos);
}

TEST_CASE("type and range violations") {
  CHECK(error_of("diffusion = { p = \"two\" }").find("expected a number") != std::string::npos);
  CHECK(error_of("diffusion = { p = 1.0 }").find("diffusion.p") != std::string::npos);
  CHECK(error_of("diffusion = { kind = \"cubic\" }").find("diffusion.kind") != std::string::npos);
  CHECK(error_of("diffusion = { kind = \"sum\" }").find("diffusion.terms") != std::string::npos);
  CHECK(error_of("diffusion = { kind = \"sum\", terms = [[1, 0.5]] }").find("exponents") !=
        std::string::npos);
  CHECK(error_of("reaction = { mu = 0.3 }").find("reaction.mu") != std::string::npos);
  CHECK(error_of("reaction = { kind = \"tabulated\" }").find("reaction.path") !=
        std::string::npos);
  CHECK(error_of("grid = { n = 2.5 }").find("expected an integer") != std::string::npos);
  CHECK(error_of("grid = { x_min = 5, x_max = 1 }").find("grid.x_max") != std::string::npos);
  CHECK(error_of("sim = { t_end = -1 }").find("sim.t_end") != std::string::npos);
  CHECK(error_of("sweep = { epsilons = [] }").find("sweep.epsilons") != std::string::npos);
  CHECK(error_of("sweep = { epsilons = [1, -2] }").find("positive") != std::string::npos);
  CHECK(error_of("deterministic = 1").find("true or false") != std::string::npos);
  CHECK(error_of("diffusion = 3").find("expected a table") != std::string::npos);
}

TEST_CASE("syntax errors report the line") {
  const auto msg = error_of("a = 1\nb = = 2\n");
  CHECK(msg.find("parse error at line 2") != std::string::npos);
}

TEST_CASE("radial grids start at the axis") {
  const auto c = parse_config("grid = { geometry = \"radial\", x_max = 50, n = 501, N = 2 }");
  CHECK(c.grid.x_min == 0.0);
  const auto g = c.grid.build();
  CHECK(g.geometry == Geometry::Radial);
  CHECK(g.dimension == 2);
  CHECK(error_of("grid = { geometry = \"radial\", x_min = -1 }").find("grid.x_min") !=
        std::string::npos);
}

TEST_CASE("load_config resolves relative reaction paths") {
  const auto c = load_config(std::string(KPP_TEST_DATA_DIR) + "/tabulated_positive_mu.toml");
  CHECK(c.reaction.kind == "tabulated");
  const auto rx = c.reaction.build(c.base_dir);
  CHECK(rx.mass() == doctest::Approx(-2.0 / 3.0).epsilon(1e-4));
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}
