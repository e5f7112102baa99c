#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nsk/duhamel.hpp"
#include "nsk/error.hpp"

using namespace nsk;

namespace {

double rel(const SpectralState& a, const SpectralState& b) {
  return seminorm(a - b, 0) / seminorm(b, 0);
}

SpectralState march(const SpectralState& u, double t, int n, const PhysParams& p, Scheme s) {
  EtdStepper st(u.grid, p, s);
  SpectralState v = u;
  for (int i = 0; i < n; ++i) v = st.step(v, t / n);
  return v;
}

bool within(double x, double target, double frac) { return std::abs(x / target - 1.0) <= frac; }

}  // namespace

TEST_CASE("linear steps reduce to the semigroup") {
  const auto g = make_grid(3, 16, 10.0);
  const PhysParams p;
  const auto u = random_state(g, 3, 0.2, 3.0, true);
  for (auto s : {Scheme::etd1, Scheme::etd_rk2}) {
    const auto a = etd_step(u, 0.3, p, s, false);
    CHECK(rel(a, apply_semigroup(u, 0.3, p)) < 1e-15);
    const auto z = SpectralState::zeros(g);
    for (double dt : {1e-3, 0.5, 7.0}) CHECK(seminorm(etd_step(z, dt, p, s), 0) == 0.0);
  }
}

TEST_CASE("step-halving order of etd_rk2") {
  const auto g = make_grid(3, 16, 10.0);
  PhysParams p;
  p.nu_tilde = 0.5;
  const auto u = random_state(g, 7, 0.1, 2.0);
  const double h = 0.05;
  const auto ref = march(u, h, 64, p, Scheme::etd_rk2);
  const double e1 = seminorm(march(u, h, 1, p, Scheme::etd_rk2) - ref, 0);
  const double e2 = seminorm(march(u, h, 2, p, Scheme::etd_rk2) - ref, 0);
  MESSAGE("Richardson ratio " << e1 / e2);
  CHECK(within(e1 / e2, 4.0, 0.2));

  // etd1 is first order: two half steps reduce the one-step error by about 2,
  // reached more slowly, so a smaller step is used
  const double h1 = 0.025;
  const auto ref1 = march(u, h1, 128, p, Scheme::etd_rk2);
  const double f1 = seminorm(march(u, h1, 1, p, Scheme::etd1) - ref1, 0);
  const double f2 = seminorm(march(u, h1, 2, p, Scheme::etd1) - ref1, 0);
  CHECK(within(f1 / f2, 2.0, 0.2));

  // the two schemes approach each other at first order
  std::vector<double> gap;
  for (int n : {4, 8, 16}) gap.push_back(seminorm(march(u, 0.4, n, p, Scheme::etd1) - march(u, 0.4, n, p, Scheme::etd_rk2), 0));
  CHECK(within(gap[0] / gap[1], 2.0, 0.2));
  CHECK(within(gap[1] / gap[2], 2.0, 0.2));
}

TEST_CASE("simulate: trivial data and linear runs") {
  const auto g = make_grid(3, 16, 12.0);
  const PhysParams p;
  StepperConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 1.0;
  cfg.sample_every = 0.25;
  cfg.store_states = true;
  const auto z = simulate(SpectralState::zeros(g), cfg, p);
  for (const auto& s : z.states) CHECK(seminorm(s, 0) == 0.0);

  // Gaussian bump
  RealField phi(g.size());
  std::vector<RealField> m(3, RealField(g.size(), 0.0));
  const auto& e = g.extents();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = static_cast<double>(i / static_cast<std::size_t>(e[1] * e[2])) * g.dx() - 6.0;
    const double y = static_cast<double>((i / static_cast<std::size_t>(e[2])) % static_cast<std::size_t>(e[1])) * g.dx() - 6.0;
    const double zc = static_cast<double>(i % static_cast<std::size_t>(e[2])) * g.dx() - 6.0;
    phi[i] = 0.01 * std::exp(-(x * x + y * y + zc * zc));
    m[0][i] = 0.5 * phi[i];
  }
  const auto u0 = state_from_physical(g, phi, m);
  cfg.nonlinear = false;
  const auto tr = simulate(u0, cfg, p);
  REQUIRE(tr.times.size() == 5);
  CHECK(tr.times.back() == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    CHECK(rel(tr.states[i], apply_semigroup(u0, tr.times[i], p)) < 1e-12);
  for (std::size_t i = 1; i < tr.times.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("conservation and symmetry along a nonlinear run") {
  const auto g = make_grid(3, 16, 12.0);
  const PhysParams p;
  auto u0 = random_state(g, 5, 0.05, 2.5);
  u0.phi[0] = 0.3;
  for (auto& c : u0.m) c[0] = cplx(0.1, 0.0);
  StepperConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 2.0;
  cfg.sample_every = 0.5;
  std::size_t samples = 0;
  simulate(u0, cfg, p, [&](double, const SpectralState& u, const ForcingField& F) {
    ++samples;
    CHECK(std::abs(u.phi[0] - u0.phi[0]) <= 1e-12 * std::abs(u0.phi[0]));
    for (std::size_t a = 0; a < 3; ++a) CHECK(std::abs(u.m[a][0] - u0.m[a][0]) <= 1e-12 * 0.1);
    CHECK(hermitian_asymmetry(u) < 1e-12);
    for (const auto& c : F.m) CHECK(std::abs(c[0]) < 1e-14);
  });
  CHECK(samples == 5);
}

TEST_CASE("adaptive stepping and failure reporting") {
  const auto g = make_grid(2, 16, 8.0);
  const PhysParams p;
  const auto u0 = random_state(g, 2, 0.01, 2.0);
  StepperConfig fixed;
  fixed.dt = 1e-3;
  fixed.t_end = 2.0;
  fixed.store_states = true;
  fixed.sample_every = 1.0;
  const auto ref = simulate(u0, fixed, p);

  StepperConfig cfg = fixed;
  cfg.adapt = true;
  cfg.dt = 0.5;
  std::vector<double> errs;
  for (double target : {1e-1, 1e-2, 1e-3}) {
    cfg.target_error = target;
    const auto tr = simulate(u0, cfg, p);
    CHECK(tr.times.back() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(tr.steps < ref.steps);
    errs.push_back(rel(tr.states.back(), ref.states.back()));
    // the embedded estimate bounds the first-order error, the kept result is second order
    CHECK(errs.back() < target);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);

  StepperConfig bad;
  bad.dt = -1.0;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = {};
  bad.t_end = -1.0;
  CHECK_THROWS_AS(validate(bad), Error);

  // large amplitude reaches the density floor
  StepperConfig big;
  big.dt = 0.01;
  big.t_end = 0.5;
  big.amplitude_guard = 100.0;
  big.capture_failures = true;
  const auto t = simulate(random_state(g, 2, 3.0, 2.0), big, p);
  CHECK((t.vacuum || t.blowup || !t.failure.empty()));
  big.capture_failures = false;
  CHECK_THROWS_AS(simulate(random_state(g, 2, 3.0, 2.0), big, p), Error);
}

TEST_CASE("Picard iteration") {
  const auto g = make_grid(3, 16, 16.0);
  const PhysParams p;
  const auto cut = make_cutoff(g, 0.5, 1.0);
  PicardConfig cfg;
  cfg.horizon = 2.0;
  cfg.intervals = 10;
  cfg.k_max = 6;

  const auto z = picard_iterate(SpectralState::zeros(g), cfg, p, cut);
  for (const auto& it : z.iterates) CHECK(it.d_k == 0.0);
  CHECK(z.mesh.size() == 11);

  const auto u0 = random_state(g, 9, 0.02, 2.0);
  PicardConfig lin = cfg;
  lin.nonlinear = false;
  const auto l = picard_iterate(u0, lin, p, cut);
  REQUIRE(!l.iterates.empty());
  CHECK(l.iterates.front().d_k == 0.0);
  CHECK(l.converged);

  const auto d = picard_iterate(u0, cfg, p, cut);
  REQUIRE(d.iterates.size() >= 3);
  CHECK(d.iterates.front().ratio == 0.0);
  for (std::size_t k = 1; k < d.iterates.size(); ++k) {
    if (d.iterates[k - 1].d_k < cfg.stop_below) break;
    CHECK(d.iterates[k].ratio <= 0.5);
  }
  CHECK_FALSE(d.non_contracting);
}
