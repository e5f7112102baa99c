#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <random>

#include "nsk/propagator.hpp"

using namespace nsk;
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;

namespace {

PhysParams params(double nu, double nut, double kappa) {
  PhysParams p;
  p.nu = nu;
  p.nu_tilde = nut;
  p.kappa = kappa;
  return p;
}

Mat generator(const Vec3& xi, int dim, const PhysParams& p) {
  const int n = dim + 1;
  const int off = 3 - dim;
  double q = 0.0;
  for (int a = off; a < 3; ++a) q += xi[static_cast<std::size_t>(a)] * xi[static_cast<std::size_t>(a)];
  const cplx I{0.0, 1.0};
  Mat G = Mat::Zero(n, n);
  for (int a = 0; a < dim; ++a) {
    G(0, 1 + a) = -I * xi[static_cast<std::size_t>(off + a)];
    G(1 + a, 0) = -I * p.kappa * q * xi[static_cast<std::size_t>(off + a)];
    for (int b = 0; b < dim; ++b)
      G(1 + a, 1 + b) = (a == b ? -p.nu * q : 0.0) -
                        p.nu_tilde * xi[static_cast<std::size_t>(off + a)] *
                            xi[static_cast<std::size_t>(off + b)];
  }
  return G;
}

Mat to_eigen(const ModePropagator& P) {
  const int n = P.dim + 1;
  const auto d = P.dense();
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = d[static_cast<std::size_t>(i * n + j)];
  return M;
}

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("eigenvalue examples") {
  auto e0 = eigenvalues(0.0, params(1, 1, 1));
  CHECK(e0.lambda_plus == cplx{});
  CHECK(e0.lambda_minus == cplx{});

  auto e1 = eigenvalues(4.0, params(1, 1, 1));
  CHECK(e1.regime == Regime::critical);
  CHECK(std::abs(e1.lambda_plus - cplx(-4.0)) < 1e-14);
  CHECK(std::abs(e1.lambda_minus - cplx(-4.0)) < 1e-14);

  auto e2 = eigenvalues(1.0, params(1, 1, 4));
  CHECK(e2.regime == Regime::oscillatory);
  CHECK(std::abs(e2.lambda_plus - cplx(-1.0, -std::sqrt(3.0))) < 1e-14);
  CHECK(std::abs(e2.lambda_minus - cplx(-1.0, std::sqrt(3.0))) < 1e-14);

  CHECK(eigenvalues(1.0, params(1, 1, 0.25)).regime == Regime::overdamped);
}

TEST_CASE("Vieta identities and sign of the real parts") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.05, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = params(U(rng), U(rng) - 0.04, U(rng) * U(rng));
    const double q = U(rng) * U(rng);
    const auto e = eigenvalues(q, p);
    const double A = p.A();
    CHECK(std::abs(e.lambda_plus + e.lambda_minus + 2.0 * A * q) <= 1e-13 * 2.0 * A * q);
    CHECK(std::abs(e.lambda_plus * e.lambda_minus - p.kappa * q * q) <= 1e-13 * p.kappa * q * q);
    CHECK(e.lambda_plus.real() < 0.0);
    CHECK(e.lambda_minus.real() < 0.0);
  }
  // every mode of a grid
  const auto g = make_grid(3, 8, 3.0);
  const auto p = params(0.7, 1.3, 0.9);
  for_each_mode(g, [&](std::size_t, const Vec3&, double q) {
    const auto e = eigenvalues(q, p);
    CHECK(std::abs(e.lambda_plus + e.lambda_minus + 2.0 * p.A() * q) <= 1e-13 * (1.0 + q));
    CHECK(std::abs(e.lambda_plus * e.lambda_minus - p.kappa * q * q) <= 1e-13 * (1.0 + q * q));
  });
}

TEST_CASE("divided difference examples") {
  CHECK(std::abs(divided_difference(-1.0, -1.0, 2.0) - 2.0 * std::exp(-2.0)) < 1e-15);
  CHECK(std::abs(divided_difference(0.0, 0.0, 5.0) - 5.0) < 1e-14);
  const double ref = (std::exp(-1.0) - std::exp(-3.0)) / 2.0;
  CHECK(std::abs(divided_difference(-1.0, -3.0, 1.0) - ref) < 1e-14 * ref);
}

TEST_CASE("exp divided differences against 50-digit direct evaluation") {
  using boost::multiprecision::cpp_bin_float_50;
  using C50 = boost::multiprecision::cpp_complex_50;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  // recursive definition evaluated in 50 digits; only distinct nodes
  std::function<C50(const std::vector<C50>&)> dd = [&](const std::vector<C50>& z) -> C50 {
    if (z.size() == 1) return exp(z[0]);
    std::vector<C50> a(z.begin(), z.end() - 1), b(z.begin() + 1, z.end());
    return (dd(a) - dd(b)) / (z.front() - z.back());
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
    const double scale = std::pow(10.0, -6.0 + 8.0 * (trial % 7) / 6.0);
    const cplx centre(-3.0 * std::abs(U(rng)) * (trial % 5), U(rng));
    std::vector<cplx> z;
    std::vector<C50> z50;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = centre + scale * cplx(U(rng), trial % 2 ? U(rng) : 0.0);
      z.push_back(v);
      z50.emplace_back(cpp_bin_float_50(v.real()), cpp_bin_float_50(v.imag()));
    }
    const cplx got = exp_divided_difference(z);
    const C50 ref = dd(z50);
    const cplx refd(static_cast<double>(ref.real()), static_cast<double>(ref.imag()));
    CHECK(std::abs(got - refd) <= 1e-13 * std::abs(refd));
  }
}

TEST_CASE("phi1 branches agree at the switch point") {
  for (double r : {0.999e-3, 1.001e-3}) {
    for (double ang : {0.0, 1.0, 2.0, 3.0}) {
      const cplx z = std::polar(r, ang);
      const cplx ref = (std::exp(z) - 1.0) / z;  // fine at this size to ~1e-13
      CHECK(std::abs(phi1(z) - ref) < 1e-12);
    }
  }
  CHECK(phi1(0.0) == cplx(1.0));
  CHECK(std::abs(phi1(-50.0) - (std::exp(-50.0) - 1.0) / -50.0) < 1e-16);
}

TEST_CASE("mode propagator: identity at t = 0 and transverse heat factor") {
  const auto p = params(1.0, 0.5, 2.0);
  for (int dim = 1; dim <= 3; ++dim) {
    const auto P = mode_propagator({0.3, -1.1, 0.7}, dim, 0.0, p);
    const auto M = to_eigen(P);
    CHECK((M - Mat::Identity(dim + 1, dim + 1)).norm() < 1e-15);
  }
  // xi = (1,0,0), nu = 1: transverse factor e^{-t}
  for (double t : {0.1, 1.0, 3.0}) {
    const auto P = mode_propagator({1.0, 0.0, 0.0}, 3, t, params(1.0, 1.0, 1.0));
    CHECK(std::abs(P.s22_transverse - std::exp(-t)) < 1e-15);
    const auto M = to_eigen(P);
    CHECK(std::abs(M(2, 2) - std::exp(-t)) < 1e-15);
    CHECK(std::abs(M(3, 3) - std::exp(-t)) < 1e-15);
    CHECK(std::abs(M(2, 3)) < 1e-15);
  }
}

TEST_CASE("mode propagator against the Eigen matrix exponential") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.5, 1.5), P(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 1 + trial % 3;
    auto p = params(P(rng), P(rng), P(rng));
    if (trial % 10 == 0) p.kappa = p.A() * p.A() * (1.0 + 1e-9 * U(rng));  // K close to 1
    const Vec3 xi{U(rng), U(rng), U(rng)};
    const double t = 0.05 + 2.0 * std::abs(U(rng));
    const Mat ref = (generator(xi, dim, p) * t).exp();
    const Mat got = to_eigen(mode_propagator(xi, dim, t, p));
    CHECK(rel_diff(got, ref) < 1e-12);
  }
}

TEST_CASE("phi-function tables against Eigen") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.5, 1.5), P(0.2, 2.0);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = params(P(rng), P(rng), P(rng));
    const Vec3 xi{U(rng), U(rng), U(rng)};
    const double h = 0.1 + std::abs(U(rng));
    const Mat X = generator(xi, 3, p) * h;
    const Mat E = X.exp();
    const Mat Id = Mat::Identity(4, 4);
    const Mat phi1_ref = X.fullPivLu().solve(E - Id);
    const Mat phi2_ref = X.fullPivLu().solve(phi1_ref - Id);
    CHECK(rel_diff(to_eigen(mode_propagator(xi, 3, h, p, MatrixFunction::phi1)), phi1_ref) < 1e-10);
    CHECK(rel_diff(to_eigen(mode_propagator(xi, 3, h, p, MatrixFunction::phi2)), phi2_ref) < 1e-9);
  }
  // zero frequency: f(0) times the identity
  const auto c1 = mode_coefficients(0.0, 0.3, params(1, 1, 1), MatrixFunction::phi1);
  const auto c2 = mode_coefficients(0.0, 0.3, params(1, 1, 1), MatrixFunction::phi2);
  CHECK(c1.a == doctest::Approx(1.0));
  CHECK(c2.a == doctest::Approx(0.5));
}

TEST_CASE("semigroup law per mode") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-2.0, 2.0), T(0.0, 10.0), P(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto p = params(P(rng), P(rng), P(rng));
    if (trial % 7 == 0) p.kappa = p.A() * p.A();
    const Vec3 xi{U(rng), U(rng), U(rng)};
    const double t = T(rng), s = T(rng);
    const Mat a = to_eigen(mode_propagator(xi, 3, t, p));
    const Mat b = to_eigen(mode_propagator(xi, 3, s, p));
    const Mat c = to_eigen(mode_propagator(xi, 3, t + s, p));
    CHECK((a * b - c).norm() <= 1e-10 * std::max(1e-3, c.norm()));
  }
}

TEST_CASE("blocks are continuous through the double root") {
  const double nu = 0.8, nut = 1.4, A = 0.5 * (nu + nut);
  const Vec3 xi{0.9, -0.4, 1.3};
  for (double t : {0.01, 0.5, 3.0, 20.0}) {
    Mat prev;
    double prev_kappa = 0.0;
    for (int j = -40; j <= 40; ++j) {
      // K = 1 + j * 1e-10 (steps of ~1e-10 in kappa)
      const double K = 1.0 + j * 1e-10;
      const double kappa = std::pow(K * A, 2);
      const Mat cur = to_eigen(mode_propagator(xi, 3, t, params(nu, nut, kappa)));
      if (j > -40) {
        const double dk = kappa - prev_kappa;
        // smooth dependence: differences proportional to the parameter step
        CHECK((cur - prev).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((cur - prev).cwiseAbs().maxCoeff() < 1e3 * dk + 1e-14);
      }
      prev = cur;
      prev_kappa = kappa;
    }
  }
}

TEST_CASE("apply_semigroup on states") {
  const auto g = make_grid(3, 16, 9.0);
  const auto p = params(1.0, 1.0, 1.0);
  auto zero = SpectralState::zeros(g);
  CHECK(seminorm(apply_semigroup(zero, 1.3, p), 0) == 0.0);

  auto u = random_state(g, 1, 0.2, 2.0, true);
  u.m[0][0] = 0.3;
  u.m[2][0] = -0.1;
  const auto v = apply_semigroup(u, 2.7, p);
  CHECK(v.phi[0] == u.phi[0]);
  CHECK(v.m[0][0] == u.m[0][0]);
  CHECK(v.m[2][0] == u.m[2][0]);
  CHECK(hermitian_asymmetry(v) < 1e-12);

  const auto w = apply_semigroup(apply_semigroup(u, 0.8, p), 1.9, p);
  const auto x = apply_semigroup(u, 2.7, p);
  CHECK(seminorm(w - x, 0) <= 1e-10 * seminorm(x, 0));

  // t = 0 is the identity on retained modes
  const auto y = apply_semigroup(u, 0.0, p);
  CHECK(seminorm(y - u, 0) == 0.0);
}

TEST_CASE("linear dissipation of kappa |grad phi|^2 + |m|^2") {
  const auto g = make_grid(3, 16, 12.0);
  for (double kappa : {0.3, 1.0, 4.0}) {
    const auto p = params(0.9, 0.6, kappa);
    const auto u = random_state(g, 17, 0.1, 2.5);
    auto energy = [&](const SpectralState& s) {
      const double a = seminorm(s, 1, Component::phi), b = seminorm(s, 0, Component::m);
      return kappa * a * a + b * b;
    };
    double last = energy(u);
    for (int i = 1; i <= 30; ++i) {
      const double e = energy(apply_semigroup(u, 0.1 * i, p));
      CHECK(e <= last * (1.0 + 1e-14));
      last = e;
    }
  }
}
