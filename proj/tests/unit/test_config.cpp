#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsk/config.hpp"
#include "nsk/error.hpp"
#include "nsk/experiments.hpp"

using namespace nsk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("nsk_test_config_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool throws_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind() == ErrorKind::ConfigError;
  }
  return false;
}

// A two-dimensional 16^2 run that takes well under a second.
ExperimentConfig small_run(const std::string& out) {
  auto c = parse_config(R"(
[grid]
dim = 2
modes = 16
length = 8.0
[stepper]
dt = 0.05
t_end = 0.5
sample_every = 0.1
[initial]
profile = "random"
amplitude = 1e-2
width = 2.0
)");
  c.output_dir = scratch(out);
  return c;
}

}  // namespace

TEST_CASE("defaults parse and survive a round trip") {
  const auto c = parse_config("");
  CHECK(c.grid.dim == 3);
  CHECK(c.r1 == 1.0);
  CHECK(c.r_inf == 2.0);
  CHECK(c.params.K() == doctest::Approx(1.0));

  auto d = parse_config(R"(
seed = 77
[grid]
dim = 2
modes = 24
length = 9.5
[params]
nu = 0.8
nu_tilde = 1.3
kappa = 0.6
[params.pressure]
model = "van_der_waals"
a = 1.0
b = 0.2
allow_noncritical = true
[cutoff]
r1 = 0.7
r_inf = 1.9
[initial]
profile = "mode"
mode = [2, 3]
energy = 0.004
[analysis]
s = 3
kappa1 = 11.0
)");
  CHECK(d.initial.mode == std::array<int, 3>{0, 2, 3});
  const auto text = to_toml(d);
  CHECK(to_toml(parse_config(text)) == text);
  CHECK(to_json_text(parse_config(text)) == to_json_text(d));
  CHECK(parse_config(text).seed == 77);
  CHECK(*parse_config(text).analysis.kappa1 == 11.0);
  // the JSON form is valid JSON; an unbounded rho_max is omitted
  const auto j = nlohmann::json::parse(to_json_text(d));
  CHECK(j["params"]["pressure"]["rho_max"].get<double>() == doctest::Approx(0.99 / 0.2));
  CHECK_FALSE(nlohmann::json::parse(to_json_text(c))["params"]["pressure"].contains("rho_max"));
}

TEST_CASE("malformed configurations are rejected") {
  CHECK(throws_config_error("bogus = 1"));
  CHECK(throws_config_error("[grid]\nsize = 3"));
  CHECK(throws_config_error("[nothing]\n"));
  CHECK(throws_config_error("[grid]\ndim = \"three\""));
  CHECK(throws_config_error("[grid]\ndim = 4"));
  CHECK(throws_config_error("[cutoff]\nr1 = 2.0\nr_inf = 2.0"));
  CHECK(throws_config_error("[cutoff]\nr1 = 3.0\nr_inf = 2.0"));
  CHECK(throws_config_error("[cutoff]\nr1 = 1.0\nr_inf = 20.0"));
  CHECK(throws_config_error("[params]\nnu = -1.0"));
  CHECK(throws_config_error("[stepper]\ndt = 0.0"));
  CHECK(throws_config_error("[stepper]\nscheme = \"rk45\""));
  CHECK(throws_config_error("[initial]\nprofile = \"file\""));
  CHECK(throws_config_error("[validate]\nsemigroup_tol = -1.0"));
  CHECK(throws_config_error("[linear_decay]\nfit_t_a = 0.5"));
  CHECK(throws_config_error("this is = not toml ["));
  CHECK_THROWS_AS(load_config("/nonexistent/nsk.toml"), Error);
}

TEST_CASE("a relative data file resolves against the config directory") {
  const auto dir = scratch("file");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "run.toml");
    f << "[grid]\ndim = 1\nmodes = 8\nlength = 6.0\n[cutoff]\nr1 = 0.5\nr_inf = 1.0\n"
         "[initial]\nprofile = \"file\"\nfile = \"u0.txt\"\n";
    std::ofstream u(dir / "u0.txt");
    for (int i = 0; i < 8; ++i) u << 0.01 * std::sin(2.0 * M_PI * i / 8.0) << " 0.0\n";
  }
  const auto c = load_config(dir / "run.toml");
  CHECK(fs::path(c.initial.file) == dir / "u0.txt");
  const auto u = make_initial(c);
  CHECK(seminorm(u, 0) > 0.0);

  std::ofstream(dir / "u0.txt") << "0.1 0.2\n";
  CHECK_THROWS_AS(make_initial(c), Error);
}

TEST_CASE("initial data: derivative form and energy rescaling") {
  auto c = parse_config("[grid]\nmodes = 16\nlength = 10.0\n[initial]\nenergy = 1e-3\n");
  std::vector<RealField> mt;
  const auto u = make_initial(c, &mt);
  REQUIRE(mt.size() == 1);
  CHECK(initial_energy(u, mt, 2) == doctest::Approx(1e-3).epsilon(1e-12));
  // m_hat = i xi m~_hat, so xi x m_hat vanishes and the curl-free part carries all of m
  for_each_mode(u.grid, [&](std::size_t i, const Vec3& xi, double) {
    const cplx cross = xi[1] * u.m[2][i] - xi[2] * u.m[1][i];
    CHECK(std::abs(cross) < 1e-15);
  });
  c.initial.amplitude = 0.0;
  c.initial.energy.reset();
  CHECK(seminorm(make_initial(c), 0) == 0.0);
  CHECK(decay_target(3, 0) == -0.75);
  CHECK(decay_target(3, 1) == -1.25);
}

TEST_CASE("simulate: zero data, headers and determinism") {
  auto c = small_run("zero");
  c.initial.amplitude = 0.0;
  const auto r = run_simulate(c);
  CHECK(r.status == 0);
  std::ifstream in(c.output_dir / "simulate.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == kSimulateHeader);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // time
    while (std::getline(ss, cell, ',')) CHECK(std::stod(cell) == 0.0);
  }
  CHECK(rows == 6);

  const auto a = small_run("det_a"), b = small_run("det_b");
  run_simulate(a);
  run_simulate(b);
  const auto csv = slurp(a.output_dir / "simulate.csv");
  CHECK(csv.size() > 100);
  CHECK(csv == slurp(b.output_dir / "simulate.csv"));

  auto s = small_run("det_seed");
  s.seed = 2;
  run_simulate(s);
  CHECK(csv != slurp(s.output_dir / "simulate.csv"));

  const auto j = nlohmann::json::parse(slurp(a.output_dir / "simulate.json"));
  CHECK(j["outside_hypotheses"] == true);
  CHECK(j["config"]["grid"]["dim"] == 2);
  CHECK(j["decay_fit"]["admissible"] == false);
  CHECK(j["steps"] == 10);
}

TEST_CASE("validate: tampered tolerances fail") {
  auto c = parse_config("[validate]\ngrid_modes = 8\nsamples = 2\nenergy_samples = 2\n");
  c.output_dir = scratch("validate");
  CHECK(run_validate(c).status == 0);

  c.validate.semigroup_tol = 0.0;
  const auto r = run_validate(c);
  CHECK(r.status == 1);
  const auto j = nlohmann::json::parse(r.summary);
  CHECK(j["pass"] == false);
  for (const auto& s : j["suites"])
    CHECK(s["pass"] == (s["name"] != "semigroup_vs_rk4"));

  c.validate.semigroup_tol = 1e-8;
  c.validate.korteweg_tol = 0.0;
  CHECK(run_validate(c).status == 1);
}

TEST_CASE("picard, linear-decay and report outputs") {
  auto c = parse_config(R"(
[grid]
modes = 16
length = 16.0
[cutoff]
r1 = 0.5
r_inf = 1.0
[initial]
energy = 1e-3
[picard]
horizon = 2.0
intervals = 10
k_max = 6
[linear_decay]
samples = 41
)");
  c.output_dir = scratch("report");
  CHECK_THROWS_AS(run_report(c), Error);

  const auto p = run_picard(c);
  CHECK(p.status == 0);
  CHECK(slurp(c.output_dir / "picard.csv").rfind(std::string(kPicardHeader) + "\n", 0) == 0);
  const auto pj = nlohmann::json::parse(p.summary);
  CHECK(pj["E0"].get<double>() == doctest::Approx(1e-3).epsilon(1e-12));

  const auto l = run_linear_decay(c);
  const auto lj = nlohmann::json::parse(l.summary);
  CHECK(lj["pass"] == true);
  CHECK(lj["target_k0"] == -0.75);
  CHECK(std::abs(lj["exponent_k1"].get<double>() + 1.25) < 0.03);
  CHECK(slurp(c.output_dir / "linear_decay.csv").rfind(std::string(kLinearDecayHeader) + "\n", 0) == 0);

  const auto r = run_report(c);
  CHECK(r.status == 0);
  const auto spec = nlohmann::json::parse(slurp(c.output_dir / "plot_spec.json"));
  CHECK(spec["inputs"]["decay"] == "linear_decay.csv");
  CHECK(spec["reference_slopes"]["k1"] == -1.25);

  // a CSV with a foreign header is refused
  std::ofstream(c.output_dir / "picard.csv") << "a,b\n1,2\n";
  CHECK_THROWS_AS(run_report(c), Error);
}
