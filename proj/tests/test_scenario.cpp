#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "doctest.h"
#include "lcms/errors.hpp"
#include "lcms/scenario.hpp"

using namespace lcms;

namespace {

const std::string kMechanics = R"(
[scenario]
kind = mechanics
name = unit_mechanics

[hamiltonian]
H = 0.5*p_t_u^2

[lee]
theta = 0.5

[initial]
sigma = 0
p = 1

[run]
t1 = 1
dt = 1e-3
)";

const Check& find(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return r.checks.front();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lcms_unit_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("Config lookups") {
  const Config c = Config::from_string("[a]\nx = 2.5\nn = 4\nexpr = 1/4\nlist = 1, 2,3\nrows = 1,2; 3,4\nb = yes\n");
  CHECK(c.number("a.x") == 2.5);
  CHECK(c.number("a.expr") == 0.25);
  CHECK(c.number("a.missing", 7.0) == 7.0);
  CHECK(c.integer("a.n", 0) == 4);
  CHECK(c.flag("a.b", false));
  CHECK(c.numbers("a.list") == std::vector<double>{1, 2, 3});
  CHECK(c.rows("a.rows") == std::vector<std::vector<double>>{{1, 2}, {3, 4}});
  CHECK_THROWS_AS((void)c.text("a.missing"), ValidationError);
  CHECK_THROWS_AS((void)c.integer("a.x", 0), ParseError);
  CHECK_THROWS_AS((void)c.flag("a.x", false), ParseError);
  CHECK_THROWS_AS(Config::from_string("[a]\nnot an assignment\n"), ParseError);
  try {
    (void)Config::from_string("[a]\nx = 1\n[b\n", "demo.ini");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("demo.ini:3") != std::string::npos);
  }
  const Config bad = Config::from_string("[a]\nx = 1 +\n");
  try {
    (void)bad.number("a.x");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("a.x") != std::string::npos);
  }
}

TEST_CASE("Check bounds") {
  CHECK(Check::at_most("a", 1.0, 1.0).pass);
  CHECK_FALSE(Check::at_most("a", NAN, 1.0).pass);
  CHECK(Check::at_least("a", 3.9, 3.8).pass);
  CHECK_FALSE(Check::at_least("a", 3.7, 3.8).pass);
  CHECK(Check::near("a", 2.2, 2.0, 0.3).pass);
  CHECK_FALSE(Check::near("a", 1.6, 2.0, 0.3).pass);
  CHECK(Check::holds("a", true).describe() == "PASS a");
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("mechanics scenario") {
  const auto dir = scratch("mech");
  RunOptions opt;
  opt.out_dir = dir;
  const RunReport r = run_scenario(Config::from_string(kMechanics), opt);
  CHECK(r.pass());
  CHECK(r.exit_code() == 0);
  CHECK(find(r, "p_final[u]").value == doctest::Approx(1.64872127).epsilon(1e-8));
  CHECK(find(r, "sigma_final[u]").value == doctest::Approx(1.29744254).epsilon(1e-8));
  CHECK(find(r, "rk4_order").value >= 3.8);
  CHECK(find(r, "connection").pass);

  const std::string csv = slurp(dir / "trajectory.csv");
  CHECK(csv.rfind("t,sigma_u,p_t_u\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1002);
  CHECK(slurp(dir / "checks.csv").rfind("name,bound,value,tolerance,target,pass\n", 0) == 0);
  CHECK(slurp(dir / "report.txt").find("status: pass") != std::string::npos);

  const auto again = scratch("mech2");
  opt.out_dir = again;
  (void)run_scenario(Config::from_string(kMechanics), opt);
  CHECK(slurp(dir / "trajectory.csv") == slurp(again / "trajectory.csv"));
  CHECK(slurp(dir / "checks.csv") == slurp(again / "checks.csv"));

  RunOptions tight;
  tight.tolerance_scale = 1e-9;
  const RunReport t = run_scenario(Config::from_string(kMechanics), tight);
  CHECK(t.status == RunStatus::CheckFailure);
  CHECK(t.exit_code() == 1);
}

TEST_CASE("scenario errors are classified") {
  auto run = [](const std::string& text) { return run_scenario(Config::from_string(text)); };

  const RunReport unknown = run("[scenario]\nkind = orbit\n");
  CHECK(unknown.exit_code() == 2);
  CHECK(unknown.message.find("orbit") != std::string::npos);

  const RunReport missing = run("[scenario]\nkind = mechanics\n[initial]\nsigma = 0\n");
  CHECK(missing.exit_code() == 2);
  CHECK(missing.message.find("initial.p") != std::string::npos);

  const RunReport open = run("[scenario]\nkind = scalar-field\n[chart]\nbase = x, y\n[lee]\ntheta = y, 0\n"
                             "[section]\nsigma = x\nmomenta = 1; 0\n");
  CHECK(open.exit_code() == 2);
  CHECK(open.message.find("lee.theta") != std::string::npos);

  const RunReport shape = run("[scenario]\nkind = scalar-field\n[chart]\nbase = x, y\n[section]\nsigma = x\n"
                              "momenta = 1\n");
  CHECK(shape.exit_code() == 2);
  CHECK(shape.message.find("section.momenta") != std::string::npos);

  const RunReport blow = run("[scenario]\nkind = mechanics\n[hamiltonian]\nH = 1/2*p_t_u^2 - u^4\n"
                             "[initial]\nsigma = 1\np = 1\n[run]\nt1 = 5\n");
  CHECK(blow.status == RunStatus::NumericAbort);
  CHECK(blow.exit_code() == 3);

  const RunReport nofile = run_scenario_file("/nonexistent/config.ini");
  CHECK(nofile.exit_code() == 2);
}

TEST_CASE("hj-verify scenario") {
  const std::string base = "[scenario]\nkind = hj-verify\n[hamiltonian]\nH = 1/2*p_t_u^2\n[lee]\ntheta = 1/2\n"
                           "[roundtrip]\ninitial = 0; 0.5\n[gamma]\ngamma = ";
  const RunReport good = run_scenario(Config::from_string(base + "exp(1/2*t)\n"));
  CHECK(good.pass());
  const RunReport bad = run_scenario(Config::from_string(base + "exp(1/2*t) + 1/10*u\n"));
  CHECK(bad.exit_code() == 1);
  CHECK(find(bad, "hj").value > 1e-3);
  CHECK(find(bad, "roundtrip").value > 1e-3);
  CHECK(find(bad, "consistent").pass);
}

TEST_CASE("scalar-field and identity scenarios") {
  const RunReport sf = run_scenario(Config::from_string(
      "[scenario]\nkind = scalar-field\n[chart]\nbase = x, y\n[lee]\ntheta = 0, 0\n"
      "[section]\nsigma = x^2 - y^2\nmomenta = 2*x; -2*y\n"));
  CHECK(sf.pass());
  CHECK(find(sf, "theta_zero_hdw").pass);
  CHECK(find(sf, "theta_zero_omega").pass);

  const RunReport wrong = run_scenario(Config::from_string(
      "[scenario]\nkind = scalar-field\n[chart]\nbase = x, y\n[section]\nsigma = x^2 + y^2\nmomenta = 2*x; 2*y\n"));
  CHECK(wrong.exit_code() == 1);

  const RunReport ids = run_scenario(Config::from_string("[scenario]\nkind = identity-suite\n[identity]\ncases = 3\n"));
  CHECK(ids.pass());
  CHECK(ids.checks.size() >= 7);
}

TEST_CASE("cauchy scenario") {
  const std::string text = R"(
[scenario]
kind = cauchy
seed = 3
[chart]
base = t, x
fiber = u
metric = 1, 0; 0, -1
time_sliced = true
[grid]
nodes = 32
[run]
t1 = 0.05
[exact]
sigma = sin(2*pi*(x - t))
pt = -2*pi*cos(2*pi*(x - t))
px = -2*pi*cos(2*pi*(x - t))
[tolerance]
precosymplectic = 1
infinite_residual = 1
exact_error = 1
exact_infinite_residual = 1
)";
  const auto dir = scratch("cauchy");
  RunOptions opt;
  opt.out_dir = dir;
  opt.refine = 3;
  const RunReport r = run_scenario(Config::from_string(text), opt);
  CHECK(r.pass());
  CHECK(find(r, "eta").value <= 1e-12);
  CHECK(find(r, "order_infinite[32]").value == doctest::Approx(2.0).epsilon(0.15));
  const std::string ladder = slurp(dir / "refinement.csv");
  CHECK(std::count(ladder.begin(), ladder.end(), '\n') == 4);
  CHECK(std::filesystem::exists(dir / "fields_0000.csv"));

  const RunReport no_exact = run_scenario(Config::from_string(
      "[scenario]\nkind = cauchy\n[chart]\nbase = t, x\nmetric = 1, 0; 0, -1\ntime_sliced = true\n"
      "[grid]\nnodes = 16\n[initial]\nsigma = 0\npt = 1\n[refine]\nlevels = 2\n"));
  CHECK(no_exact.exit_code() == 2);
  CHECK(no_exact.message.find("exact") != std::string::npos);
}
