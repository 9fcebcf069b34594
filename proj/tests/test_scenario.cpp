#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "curvedbody/scenario.hpp"

using namespace curvedbody;

namespace {

const std::filesystem::path kData = CURVEDBODY_TEST_DATA;

Scenario parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(KeyValueDocument::parse(in));
}

SweepConfig parse_sweep_text(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep(KeyValueDocument::parse(in));
}

const char* kTriangle = R"(
[scenario]
name = tri
masses = 1, 1, 1
[shape]
alphas = regular
[reduced]
rho = 1.5
theta_dot = 0.3
)";

}  // namespace

TEST_CASE("key-value documents") {
  std::istringstream in(R"(
# comment
[a]
x = 1   ; trailing
y =  two words
x = 3
[b]
; nothing
)");
  const KeyValueDocument doc = KeyValueDocument::parse(in);
  CHECK(doc.has_section("a"));
  CHECK(doc.has_section("b"));
  CHECK_FALSE(doc.has_section("c"));
  CHECK(doc.get("a", "y") == "two words");
  CHECK(doc.get_all("a", "x") == std::vector<std::string>{"1", "3"});
  CHECK_FALSE(doc.get("a", "z").has_value());
  CHECK(doc.entries("b").empty());

  std::istringstream bad("[a]\nno equals sign\n");
  CHECK_THROWS_AS(KeyValueDocument::parse(bad), ConfigError);
  std::istringstream orphan("x = 1\n");
  CHECK_THROWS_AS(KeyValueDocument::parse(orphan), ConfigError);
  CHECK_THROWS_AS(KeyValueDocument::load(kData / "does_not_exist.ini"), ConfigError);
}

TEST_CASE("real parsing") {
  CHECK(parse_real("1.25") == 1.25);
  CHECK(parse_real(" -3e-2 ") == -0.03);
  CHECK(parse_real("sqrt(2)") == std::sqrt(2.0));
  CHECK(parse_real("pi") == std::numbers::pi);
  CHECK(parse_real("-pi") == -std::numbers::pi);
  CHECK(parse_real("2*pi/3") == doctest::Approx(2 * std::numbers::pi / 3).epsilon(1e-15));
  CHECK(parse_real("pi/4") == doctest::Approx(std::numbers::pi / 4).epsilon(1e-15));
  CHECK_THROWS_AS(parse_real("abc"), ConfigError);
  CHECK_THROWS_AS(parse_real("1.0x"), ConfigError);
  CHECK_THROWS_AS(parse_real(""), ConfigError);
  CHECK(parse_real_list("1, 2 ,3") == std::vector<double>{1, 2, 3});
  CHECK(parse_bool("yes"));
  CHECK_FALSE(parse_bool("false"));
  CHECK_THROWS_AS(parse_bool("maybe"), ConfigError);
  CHECK(parse_u64("18446744073709551615") == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_u64("-1"), ConfigError);
}

TEST_CASE("ansatz scenario") {
  const Scenario sc = parse_text(kTriangle);
  CHECK(sc.name == "tri");
  CHECK(sc.has_ansatz());
  CHECK(sc.body_count() == 3);
  REQUIRE(sc.regular_offset.has_value());
  CHECK(*sc.regular_offset == 0.0);
  CHECK(sc.shape->betas == std::vector<double>(3, 0.0));
  CHECK(sc.t_end == 10.0);
  CHECK(sc.seed == 0);
  CHECK(sc.integrator.precision == Precision::Double);
  const SystemState s = sc.initial_state();
  CHECK(s.size() == 3);
  CHECK(sc.ansatz_reference()->alpha == 0.0);
}

TEST_CASE("body-list scenario") {
  const Scenario sc = load_scenario(kData / "collapse.ini");
  CHECK_FALSE(sc.has_ansatz());
  CHECK(sc.body_count() == 2);
  CHECK(sc.t_end == 50.0);
  CHECK_FALSE(sc.ansatz_reference().has_value());
  CHECK(sc.initial_state().bodies[1].q(2) == 0.52109530549374738);
}

TEST_CASE("data files parse") {
  for (const char* f : {"triangle_pulsating.ini", "square_equilibrium.ini", "pentagon_pulsating.ini",
                        "lifted_beta.ini", "irregular_quad.ini", "collapse.ini"}) {
    CAPTURE(f);
    CHECK_NOTHROW(load_scenario(kData / f));
  }
  CHECK_THROWS_AS(load_scenario(kData / "coincident.ini"), ConfigError);
}

TEST_CASE("scenario errors") {
  // both representations
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[bodies]\nbody = 1, 0, 0, 0, 1, 0, 0, 0, 0\n"), ConfigError);
  // neither
  CHECK_THROWS_AS(parse_text("[scenario]\nname = x\n"), ConfigError);
  // shape without reduced
  CHECK_THROWS_AS(parse_text("[scenario]\nmasses = 1, 1, 1\n[shape]\nalphas = regular\n"), ConfigError);
  // rho at the degenerate limit
  CHECK_THROWS_AS(parse_text("[scenario]\nmasses = 1, 1, 1\n[shape]\nalphas = regular\n[reduced]\nrho = 1\n"), ConfigError);
  // alpha count
  CHECK_THROWS_AS(parse_text("[scenario]\nmasses = 1, 1, 1\n[shape]\nalphas = 0, 1\n[reduced]\nrho = 2\n"), ConfigError);
  // sigma must be -1 with an ansatz
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[scenario]\nsigma = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[scenario]\nsigma = 0\n"), ConfigError);
  // time interval
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[scenario]\nt_end = 0\n"), ConfigError);
  // integrator settings
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[integrator]\nrel_tol = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[integrator]\nprecision = octuple\n"), ConfigError);
  // bodies
  CHECK_THROWS_AS(parse_text("[bodies]\nbody = 1, 0, 0, 0, 1\nbody = 1, 0, 0, 0, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[bodies]\nbody = 1, 0, 0, 0, 1, 0, 0, 0, 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[bodies]\nbody = 1, 0, 0, 0, 1, 0, 0, 0, 0\nbody = -1, 0.5, 0, 0, 1.118033988749895, 0, 0, 0, 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("[bodies]\nbody = 1, 0, 0, 0, 1, 0, 0, 0, 0\nbody = 1, 0.5, 0, 0, 3, 0, 0, 0, 0\n"), ConfigError);
}

TEST_CASE("integrator section") {
  const Scenario sc = parse_text(std::string(kTriangle) +
                                 "[integrator]\nrel_tol = 1e-9\nabs_tol = 1e-11\nmax_step = 0.05\n"
                                 "projection_interval = 2\nsample_interval = 0.5\nprecision = quad\n");
  CHECK(sc.integrator.rel_tol == 1e-9);
  CHECK(sc.integrator.abs_tol == 1e-11);
  CHECK(sc.integrator.max_step == 0.05);
  CHECK(sc.integrator.projection_interval == 2);
  CHECK(sc.integrator.sample_interval == 0.5);
  CHECK(sc.integrator.precision == Precision::Quad);
}

TEST_CASE("quad and double scenario runs agree") {
  Scenario sc = parse_text(std::string(kTriangle) + "[scenario]\nt_end = 2\n");
  const Trajectory d = integrate_scenario(sc);
  sc.integrator.precision = Precision::Quad;
  const Trajectory q = integrate_scenario(sc);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((d.back().state.bodies[i].q - q.back().state.bodies[i].q).cwiseAbs().maxCoeff() <= 1e-8);
  }
  CHECK(q.back().diag.ansatz.has_value());
}

TEST_CASE("outputs section") {
  const Scenario sc = parse_text(std::string(kTriangle) + "[outputs]\ntrajectory = no\nreport = off\n");
  CHECK_FALSE(sc.outputs.trajectory);
  CHECK(sc.outputs.diagnostics);
  CHECK_FALSE(sc.outputs.report);
}

TEST_CASE("sweep files") {
  const SweepConfig eq = load_sweep(kData / "equilibrium_sweep.ini");
  CHECK(eq.kind == SweepKind::Equilibrium);
  CHECK(eq.ns == std::vector<std::size_t>{3, 4, 5, 6});
  CHECK(eq.rhos.size() == 3);
  CHECK(eq.rhos[1] == std::sqrt(2.0));
  CHECK(eq.integrator.precision == Precision::Quad);
  CHECK(eq.integrator.rel_tol == 1e-12);

  const SweepConfig beta = load_sweep(kData / "beta_sweep.ini");
  CHECK(beta.kind == SweepKind::Beta);
  CHECK(beta.draws == 200);
  CHECK(beta.seed == 2024);
  CHECK(beta.integrator.precision == Precision::Double);

  const SweepConfig empty = load_sweep(kData / "empty_sweep.ini");
  CHECK(empty.rhos.empty());

  CHECK_THROWS_AS(parse_sweep_text("[sweep]\nkind = other\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_text("[sweep]\nns = 1.5\n"), ConfigError);
  CHECK(parse_sweep_text("[sweep]\n[integrator]\nprecision = double\n").integrator.precision == Precision::Double);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[integrator]\nrel_tl = 1e-9\n"), ConfigError);
  CHECK_THROWS_AS(parse_text(std::string(kTriangle) + "[extra]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_text("[sweep]\nrho = 2\n"), ConfigError);
}
