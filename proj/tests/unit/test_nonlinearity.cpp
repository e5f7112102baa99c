#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "nsk/error.hpp"
#include "nsk/nonlinearity.hpp"
#include "nsk/oracle.hpp"

using namespace nsk;

namespace {

double rel_err(const SpectralState& a, const SpectralState& b) {
  return seminorm(a - b, 0) / seminorm(b, 0);
}

double field_l2(const std::vector<ComplexField>& v) {
  double s = 0.0;
  for (const auto& f : v)
    for (auto c : f) s += std::norm(c);
  return std::sqrt(s);
}

// kappa phi grad Lap phi assembled from its own transforms
std::vector<ComplexField> identity_rhs(const Grid& g, const ComplexField& phi_hat, double kappa) {
  ComplexField ph = phi_hat;
  dealias(g, ph);
  const auto phi = from_spectral(g, ph);
  std::vector<ComplexField> out;
  const std::size_t off = 3 - static_cast<std::size_t>(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    ComplexField d(g.size());
    for_each_mode(g, [&](std::size_t i, const Vec3& xi, double q) {
      d[i] = cplx(0.0, xi[off + static_cast<std::size_t>(a)]) * (-q) * ph[i];
    });
    auto dp = from_spectral(g, d);
    for (std::size_t p = 0; p < dp.size(); ++p) dp[p] *= kappa * phi[p];
    auto h = to_spectral(g, std::span<const double>(dp));
    dealias(g, h);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace

TEST_CASE("P1 factor") {
  RealField z(10, 0.0), one(10, 1.0);
  for (double v : p1_factor(z)) CHECK(v == -1.0);
  const double ref = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      [](double t) { return -1.0 / ((1.0 + t) * (1.0 + t)); }, 0.0, 1.0);
  for (double v : p1_factor(one)) CHECK(v == doctest::Approx(ref).epsilon(1e-14));

  RealField mix{0.3, -0.4, 0.0, 2.0, -0.05};
  const auto p = p1_factor(mix);
  for (std::size_t i = 0; i < mix.size(); ++i)
    CHECK(std::abs(1.0 + mix[i] * p[i] - 1.0 / (1.0 + mix[i])) < 1e-13);

  RealField vac{0.0, -0.999};
  CHECK_THROWS_AS(p1_factor(vac, 0.01), Error);
  try {
    p1_factor(vac, 0.01);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VacuumApproach);
  }
  RealField edge{-0.9};
  CHECK_THROWS_AS(p1_factor(edge, 0.1), Error);
}

TEST_CASE("P2 factor") {
  RealField phi{0.0, 0.3, -0.4, 0.1};
  for (double v : p2_factor(phi, critical_quadratic(3.0))) CHECK(v == doctest::Approx(3.0).epsilon(1e-14));

  // rho^3 - 3 rho = -2 + 3 x^2 + x^3 with x = rho - 1
  const auto cubic = custom_polynomial({-2.0, 0.0, 3.0, 1.0});
  CHECK(p2_point(0.0, cubic) == doctest::Approx(3.0).epsilon(1e-14));
  // P''(1 + t x) = 6 + 6 t x, so the integral is 3 + x
  for (double x : {0.2, -0.3, 0.45}) CHECK(p2_point(x, cubic) == doctest::Approx(3.0 + x).epsilon(1e-14));

  const auto vdw = van_der_waals(1.0, 0.2);
  CHECK(p2_point(0.0, vdw) == doctest::Approx(0.5 * vdw.d2P(1.0)).epsilon(1e-13));
  const double x = 0.25;
  const double ref = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return (1.0 - t) * vdw.d2P(1.0 + t * x); }, 0.0, 1.0);
  CHECK(p2_point(x, vdw) == doctest::Approx(ref).epsilon(1e-13));
}

TEST_CASE("Korteweg divergence identity") {
  const auto g = make_grid(3, 32, 2.0 * M_PI);
  SUBCASE("single mode") {
    ComplexField ph(g.size(), 0.0);
    const auto i = g.k_to_index({1, 2, 0});
    ph[i] = 0.7;
    ph[g.conjugate_index(i)] = 0.7;
    const auto lhs = korteweg_divergence(g, ph, 1.3);
    const auto rhs = identity_rhs(g, ph, 1.3);
    std::vector<ComplexField> diff = lhs;
    for (std::size_t a = 0; a < diff.size(); ++a)
      for (std::size_t j = 0; j < diff[a].size(); ++j) diff[a][j] -= rhs[a][j];
    REQUIRE(field_l2(rhs) > 0.0);
    CHECK(field_l2(diff) / field_l2(rhs) < 1e-10);
  }
  SUBCASE("band-limited random field") {
    const auto s = random_state(g, 9, 0.2, 3.0);
    const auto lhs = korteweg_divergence(g, s.phi, 0.5);
    const auto rhs = identity_rhs(g, s.phi, 0.5);
    std::vector<ComplexField> diff = lhs;
    for (std::size_t a = 0; a < diff.size(); ++a)
      for (std::size_t j = 0; j < diff[a].size(); ++j) diff[a][j] -= rhs[a][j];
    CHECK(field_l2(diff) / field_l2(rhs) < 1e-10);
  }
  SUBCASE("trivial inputs") {
    ComplexField c(g.size(), 0.0);
    c[0] = 5.0;
    CHECK(field_l2(korteweg_divergence(g, c, 1.0)) == 0.0);
    const auto s = random_state(g, 1, 0.2, 3.0);
    CHECK(field_l2(korteweg_divergence(g, s.phi, 0.0)) == 0.0);
  }
}

TEST_CASE("F against the dense convolution oracle") {
  const auto g = make_grid(3, 8, 2.0 * M_PI);
  PhysParams p;
  p.nu = 0.8;
  p.nu_tilde = 1.3;
  p.kappa = 0.6;
  p.pressure = van_der_waals(1.0, 0.2);

  CHECK(seminorm(eval_F(SpectralState::zeros(g), p), 0) == 0.0);

  SUBCASE("momentum only") {
    auto u = random_state(g, 3, 0.05, 2.0);
    std::fill(u.phi.begin(), u.phi.end(), cplx{});
    const auto F = eval_F(u, p);
    const auto R = oracle::direct_nonlinearity(u, p);
    REQUIRE(seminorm(R, 0) > 0.0);
    CHECK(rel_err(F, R) < 1e-10);
  }
  SUBCASE("full forcing, several seeds") {
    for (unsigned seed = 10; seed < 15; ++seed) {
      const auto u = random_state(g, seed, 0.03, 2.0);
      const auto F = eval_F(u, p);
      const auto R = oracle::direct_nonlinearity(u, p);
      CHECK(rel_err(F, R) < 1e-9);
      for (auto c : F.phi) CHECK(c == cplx{});
    }
  }
  SUBCASE("two-dimensional grid") {
    const auto g2 = make_grid(2, 8, 5.0);
    const auto u = random_state(g2, 21, 0.03, 2.0);
    CHECK(rel_err(eval_F(u, p), oracle::direct_nonlinearity(u, p)) < 1e-9);
  }
}

TEST_CASE("divergence form and quadratic smallness") {
  const auto g = make_grid(3, 16, 10.0);
  const PhysParams p;
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto u = random_state(g, seed, 0.1, 3.0, true);
    const auto F = eval_F(u, p);
    for (const auto& c : F.m) CHECK(std::abs(c[0]) < 1e-14);
    CHECK(hermitian_asymmetry(F) < 1e-15);
  }

  const auto u = random_state(g, 77, 1.0, 3.0);
  std::vector<double> ratios;
  for (double eps : {1e-2, 1e-3, 1e-4}) ratios.push_back(seminorm(eval_F(eps * u, p), 0) / (eps * eps));
  for (double r : ratios) CHECK(std::abs(r / ratios.back() - 1.0) < 0.05);
}

TEST_CASE("evaluation errors") {
  const auto g = make_grid(2, 16, 6.0);
  const PhysParams p;
  auto u = random_state(g, 4, 0.6, 2.0);
  NonlinearLimits lim;
  lim.amplitude_guard = 0.5;
  const auto big = 5.0 * u;
  CHECK_THROWS_AS(NonlinearEvaluator(g, p, lim)(big), Error);

  auto vac = SpectralState::zeros(g);
  vac.phi[0] = -0.95 * g.length() * g.length();  // mean density 0.05
  try {
    eval_F(vac, p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VacuumApproach);
  }

  auto bad = SpectralState::zeros(g);
  bad.m[0][g.k_to_index({0, 1, 0})] = std::nan("");
  CHECK_THROWS_AS(eval_F(bad, p), Error);

  const auto g8 = make_grid(3, 8, 2.0);
  CHECK_THROWS_AS(oracle::direct_nonlinearity(random_state(g8, 1, 1.0, 3.0), p), Error);
  CHECK_THROWS_AS(oracle::direct_nonlinearity(SpectralState::zeros(make_grid(3, 16, 2.0)), p), Error);
}
