#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sdpde/scenario_io.hpp"

using namespace sdpde;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sdpde_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Parses and returns the error text, or "" when the config is accepted.
std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("an empty config yields the documented Nicholson defaults") {
  const Scenario s = parse_scenario("");
  CHECK(s.damping == 1.0);
  CHECK(s.delay_span == 1.0);
  CHECK(s.nonlinearity.kind == Nonlinearity::Kind::nicholson);
  CHECK(s.nonlinearity.p == 2.0);
  CHECK(s.domain.length == doctest::Approx(std::numbers::pi));
  CHECK(s.modes == 16);
  CHECK(s.domain.grid_size == 64);
  CHECK(s.dt == 1.0 / 64);
  CHECK(s.epsilon.eps0 == 0.125);
  CHECK(s.mode.n == 3);
}

TEST_CASE("number tokens") {
  CHECK(parse_number("pi") == std::numbers::pi);
  CHECK(parse_number("1/64") == 1.0 / 64);
  CHECK(parse_number("2*pi") == 2.0 * std::numbers::pi);
  CHECK(parse_number("pi/4") == std::numbers::pi / 4);
  CHECK(parse_number("-0.5") == -0.5);
  CHECK(parse_number("1e-3") == 1e-3);
  CHECK(parse_number("2.5e+1/5") == 5.0);
  CHECK_THROWS_AS(parse_number("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_number("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_number(""), std::invalid_argument);
}

TEST_CASE("syntax errors carry line numbers") {
  CHECK(mentions(error_of("[domain]\nlength = 2\nwidth = 3\n"), "line 3: unknown key 'width'"));
  CHECK(mentions(error_of("# c\n[nowhere]\n"), "line 2: unknown section"));
  CHECK(mentions(error_of("[domain]\nlength 2\n"), "line 2: expected key = value"));
  CHECK(mentions(error_of("length = 2\n"), "line 1: key outside"));
  CHECK(mentions(error_of("[domain]\nlength = 2\nlength = 3\n"), "line 3: duplicate key"));
  CHECK(mentions(error_of("[domain]\nlength =\n"), "line 2: missing value"));
  CHECK(mentions(error_of("[domain\n"), "line 1: unterminated"));
  CHECK(mentions(error_of("[integration]\ndt = fast\n"), "line 2: dt"));
  CHECK(mentions(error_of("[delay]\nlaw = random\n"), "line 2: law must be one of"));
}

TEST_CASE("every scenario invariant has a config-level error path") {
  CHECK(mentions(error_of("[domain]\nlength = -1\n"), "line 2: length must be positive"));
  CHECK(mentions(error_of("[domain]\ngrid = 10\n"), "grid size 10 below"));
  CHECK(mentions(error_of("[domain]\ngrid = 0\n"), "line 2: grid must be"));
  CHECK(mentions(error_of("[operator]\ndamping = 0\n"), "line 2: damping must be positive"));
  CHECK(mentions(error_of("[integration]\nmodes = 0\n"), "line 2: modes must be >= 1"));
  CHECK(mentions(error_of("[integration]\ndt = -1\n"), "dt must be positive"));
  CHECK(mentions(error_of("[integration]\ndt = 0.3\n"), "must be an integer"));
  CHECK(mentions(error_of("[integration]\ndt = 1/4\nhorizon = 1/8\n"), "horizon"));
  CHECK(mentions(error_of("[delay]\nspan = 0\n"), "span must be positive"));
  CHECK(mentions(error_of("[delay]\neta_max = 0.95\n"), "kernel support invariant"));
  CHECK(mentions(error_of("[delay]\nlaw = constant\neta0 = 0.9\n"), "kernel support invariant"));
  CHECK(mentions(error_of("[delay]\nlaw = constant\neta0 = -0.1\n"), "eta0 must be >= 0"));
  CHECK(mentions(error_of("[delay]\neta_max = 0\n"), "eta_max must be positive"));
  CHECK(mentions(error_of("[delay]\neps0 = 0\n"), "eps0 must be positive"));
  CHECK(mentions(error_of("[delay]\neps_ratio = 1\n"), "eps_ratio must lie in (0, 1)"));
  CHECK(mentions(error_of("[delay]\nn = 0\n"), "n must be >= 1"));
  CHECK(mentions(error_of("[nonlinearity]\np = 0\n"), "p must be positive"));
  CHECK(mentions(error_of("[nonlinearity]\nkind = table\ntable_w = 0, 0\ntable_b = 1, 1\n"), "line 3"));
  CHECK(mentions(error_of("[nonlinearity]\nkind = table\n"), "needs table_w"));
  CHECK(mentions(error_of("[spatial_kernel]\nkind = gaussian\nalpha = 0\n"), "alpha must be positive"));
  CHECK(mentions(error_of("[initial]\nu0 = 1, nan\n"), "line 2: u0"));
  CHECK(mentions(error_of("[initial]\nhistory = wavy\n"), "history must be one of"));
  CHECK(mentions(error_of("[output]\ncoefficients = maybe\n"), "coefficients must be one of"));
}

TEST_CASE("overrides apply before the automatic grid and validation") {
  ScenarioOverrides o;
  o.modes = 32;
  o.dt = 1.0 / 128;
  const Scenario s = parse_scenario("[domain]\ngrid = auto\n", o);
  CHECK(s.modes == 32);
  CHECK(s.domain.grid_size == 128);
  CHECK(s.dt == 1.0 / 128);
  ScenarioOverrides bad;
  bad.dt = 0.3;
  CHECK_THROWS_AS(parse_scenario("", bad), ScenarioError);
}

TEST_CASE("resolved config text round-trips") {
  const char* text = R"(
[domain]
length = 2
grid = 50
[nonlinearity]
kind = table
table_w = 0, 1, 2
table_b = 0, 1/3, 0.1
[spatial_kernel]
kind = gaussian
alpha = 0.07
[delay]
law = constant
eta0 = 0.4
mode = discrete
[integration]
dt = 1/32
horizon = 3
modes = 12
[initial]
u0 = 0.1, -0.2, 0.3
history = ramp
[output]
dir = somewhere
coefficients = false
)";
  const Scenario a = parse_scenario(text);
  const Scenario b = parse_scenario(to_config_text(a));
  CHECK(to_config_text(a) == to_config_text(b));
  CHECK(b.nonlinearity.table_b[1] == 1.0 / 3);
  CHECK(b.spatial_kernel.alpha == 0.07);
  CHECK(b.mode.is_discrete());
  CHECK(b.initial.history == InitialData::HistoryShape::ramp);
  CHECK(b.initial.u0 == a.initial.u0);
  CHECK(b.domain.grid_size == 50);
  CHECK_FALSE(b.output.coefficients);
  CHECK(to_config_text(parse_scenario(to_config_text(Scenario{}))) == to_config_text(Scenario{}));
}

TEST_CASE("trajectory CSV: header, full precision round trip, determinism") {
  const fs::path empty = scratch("empty.csv");
  export_trajectory(Trajectory{}, empty.string());
  CHECK(slurp(empty) == "t,norm_l2,norm_h1,eta,f_norm\n");

  Scenario s;
  s.horizon = 2.0;
  const Trajectory tr = run(s);
  const fs::path p = scratch("traj.csv");
  export_trajectory(tr, p.string());
  const std::string first_line = slurp(p).substr(0, slurp(p).find('\n'));
  CHECK(mentions(first_line, "t,norm_l2,norm_h1,eta,f_norm,g_1,"));
  CHECK(mentions(first_line, ",g_16"));

  const Trajectory back = read_trajectory_csv(p.string());
  REQUIRE(back.size() == tr.size());
  const SpectralBasis basis = s.basis();
  for (std::size_t j = 0; j < tr.size(); ++j) {
    CHECK(back.times[j] == tr.times[j]);
    CHECK(back.states[j] == tr.states[j]);
    CHECK(std::abs(basis.norm(back.states[j], 0.0) - tr.norm_l2[j]) <= 1e-12);
    CHECK(std::abs(basis.norm(back.states[j], 0.5) - tr.norm_h1[j]) <= 1e-12);
  }

  const fs::path q = scratch("traj_again.csv");
  export_trajectory(run(s), q.string());
  CHECK(slurp(p) == slurp(q));

  const fs::path slim = scratch("slim.csv");
  export_trajectory(tr, slim.string(), false);
  CHECK(read_trajectory_csv(slim.string()).states.empty());
}

TEST_CASE("I/O failures name the path") {
  Trajectory tr;
  try {
    export_trajectory(tr, "/nonexistent-dir/x.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(mentions(e.what(), "/nonexistent-dir/x.csv"));
  }
  CHECK_THROWS_AS(load_scenario("/nonexistent-dir/cfg.ini"), IoError);
  CHECK_THROWS_AS(read_trajectory_csv("/nonexistent-dir/t.csv"), IoError);
}

TEST_CASE("report JSON carries every documented field") {
  VerificationReport rep;
  rep.scenario_config = to_config_text(Scenario{});
  CheckRecord r;
  r.name = "energy";
  r.inequality = "a <= b";
  r.constant("k1", 1.0);
  r.metric("worst", 0.5);
  r.margin = 0.25;
  r.slack = 1e-3;
  r.passed = true;
  rep.records.push_back(r);
  const auto doc = nlohmann::json::parse(report_json(rep));
  CHECK(doc.at("config").get<std::string>() == rep.scenario_config);
  CHECK(doc.at("all_passed").get<bool>());
  const auto& c = doc.at("checks").at(0);
  for (const char* key : {"name", "inequality", "constants", "metrics", "margin", "slack", "passed", "note"}) {
    CHECK(c.contains(key));
  }
  CHECK(c.at("constants").at("k1").get<double>() == 1.0);
  CHECK(c.at("margin").get<double>() == 0.25);

  const fs::path p = scratch("report.json");
  export_report(rep, p.string());
  CHECK(nlohmann::json::parse(slurp(p)) == doc);
}
