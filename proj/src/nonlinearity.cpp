#include "nsk/nonlinearity.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

namespace {

constexpr cplx I{0.0, 1.0};

void check_density(std::span<const double> phi, const PressureModel& pressure) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : phi) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "density perturbation not finite");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (1.0 + lo <= pressure.rho_min)
    throw Error(ErrorKind::VacuumApproach,
                "min density " + std::to_string(1.0 + lo) + " <= rho_min");
  if (1.0 + hi >= pressure.rho_max)
    throw Error(ErrorKind::DensityWindow,
                "max density " + std::to_string(1.0 + hi) + " >= rho_max");
}

// Physical samples of (i xi_axis)^order f_hat; axis < 0 means the field itself.
RealField physical(const Grid& grid, std::span<const cplx> f_hat, int axis) {
  if (axis < 0) return from_spectral(grid, f_hat);
  ComplexField tmp(f_hat.begin(), f_hat.end());
  const std::size_t ax = 3 - static_cast<std::size_t>(grid.dim()) + static_cast<std::size_t>(axis);
  for_each_mode(grid, [&](std::size_t i, const Vec3& xi, double) { tmp[i] *= I * xi[ax]; });
  return from_spectral(grid, tmp);
}

RealField physical_laplacian(const Grid& grid, std::span<const cplx> f_hat) {
  ComplexField tmp(f_hat.begin(), f_hat.end());
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) { tmp[i] *= -q; });
  return from_spectral(grid, tmp);
}

ComplexField truncated(const Grid& grid, std::span<const cplx> f) {
  ComplexField out(f.begin(), f.end());
  dealias(grid, out);
  return out;
}

}  // namespace

RealField p1_factor(std::span<const double> phi, double rho_min) {
  RealField out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (1.0 + phi[i] <= rho_min)
      throw Error(ErrorKind::VacuumApproach,
                  "density " + std::to_string(1.0 + phi[i]) + " <= rho_min");
    out[i] = -1.0 / (1.0 + phi[i]);
  }
  return out;
}

double p2_point(double phi, const PressureModel& pressure) {
  using Rule = boost::math::quadrature::gauss<double, 16>;
  // map [-1,1] -> [0,1]
  return 0.5 * Rule::integrate(
                   [&](double x) {
                     const double tau = 0.5 * (x + 1.0);
                     return (1.0 - tau) * pressure.d2P(1.0 + tau * phi);
                   },
                   -1.0, 1.0);
}

RealField p2_factor(std::span<const double> phi, const PressureModel& pressure) {
  RealField out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (1.0 + phi[i] <= pressure.rho_min)
      throw Error(ErrorKind::VacuumApproach,
                  "density " + std::to_string(1.0 + phi[i]) + " <= rho_min");
    out[i] = p2_point(phi[i], pressure);
  }
  return out;
}

std::vector<ComplexField> korteweg_divergence(const Grid& grid, std::span<const cplx> phi_hat,
                                              double kappa) {
  if (phi_hat.size() != grid.size())
    throw Error(ErrorKind::ShapeMismatch, "phi_hat does not match the grid");
  const auto n = static_cast<std::size_t>(grid.dim());
  const std::size_t off = 3 - n;
  const auto ph = truncated(grid, phi_hat);
  const auto phi = physical(grid, ph, -1);
  const auto lap = physical_laplacian(grid, ph);
  std::vector<RealField> grad(n);
  for (std::size_t a = 0; a < n; ++a) grad[a] = physical(grid, ph, static_cast<int>(a));

  RealField iso(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double g2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) g2 += grad[a][p] * grad[a][p];
    iso[p] = phi[p] * lap[p] + 0.5 * g2;
  }

  std::vector<ComplexField> out(n, ComplexField(grid.size(), 0.0));
  RealField comp(grid.size());
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      for (std::size_t p = 0; p < grid.size(); ++p)
        comp[p] = kappa * ((a == b ? iso[p] : 0.0) - grad[a][p] * grad[b][p]);
      const auto hat = to_spectral(grid, std::span<const double>(comp));
      for_each_mode(grid, [&](std::size_t i, const Vec3& xi, double) {
        out[a][i] += I * xi[off + b] * hat[i];
        if (b != a) out[b][i] += I * xi[off + a] * hat[i];
      });
    }
  for (auto& c : out) {
    dealias(grid, c);
    symmetrize(grid, c);
  }
  return out;
}

NonlinearEvaluator::NonlinearEvaluator(const Grid& grid, const PhysParams& params,
                                       NonlinearLimits limits)
    : grid_(grid), params_(params), limits_(limits) {
  validate(params_);
}

ForcingField NonlinearEvaluator::operator()(const SpectralState& u) const {
  ForcingField out = SpectralState::zeros(grid_);
  evaluate(u, out);
  return out;
}

void NonlinearEvaluator::evaluate(const SpectralState& u, ForcingField& out) const {
  if (!(u.grid == grid_)) throw Error(ErrorKind::ShapeMismatch, "state grid vs evaluator grid");
  if (!(out.grid == grid_)) out = SpectralState::zeros(grid_);
  const auto n = static_cast<std::size_t>(grid_.dim());
  const std::size_t off = 3 - n;
  const std::size_t N = grid_.size();
  const double kappa = params_.kappa;

  const auto ph = truncated(grid_, u.phi);
  const auto phi = physical(grid_, ph, -1);
  check_density(phi, params_.pressure);
  if (std::isfinite(limits_.amplitude_guard)) {
    double sup = 0.0;
    for (double v : phi) sup = std::max(sup, std::abs(v));
    if (sup > limits_.amplitude_guard)
      throw Error(ErrorKind::AmplitudeTooLarge,
                  "sup|phi| = " + std::to_string(sup) + " exceeds the amplitude guard");
  }
  const auto lap = physical_laplacian(grid_, ph);
  std::vector<RealField> grad(n), m(n);
  for (std::size_t a = 0; a < n; ++a) {
    grad[a] = physical(grid_, ph, static_cast<int>(a));
    m[a] = physical(grid_, truncated(grid_, u.m[a]), -1);
  }

  // pointwise scalars
  RealField r(N), pres(N), iso(N);
  for (std::size_t p = 0; p < N; ++p) {
    r[p] = 1.0 / (1.0 + phi[p]);
    pres[p] = p2_point(phi[p], params_.pressure) * phi[p] * phi[p];
    double g2 = 0.0;
    for (std::size_t a = 0; a < n; ++a) g2 += grad[a][p] * grad[a][p];
    iso[p] = kappa * (phi[p] * lap[p] + 0.5 * g2);
  }

  for (auto& c : out.m) std::fill(c.begin(), c.end(), cplx{});
  std::fill(out.phi.begin(), out.phi.end(), cplx{});

  // stress S_ab = m_a m_b/(1+phi) + P2 phi^2 delta_ab - Phi_ab, contributes -div S
  RealField comp(N);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      for (std::size_t p = 0; p < N; ++p) {
        double v = m[a][p] * m[b][p] * r[p] + kappa * grad[a][p] * grad[b][p];
        if (a == b) v += pres[p] - iso[p];
        comp[p] = v;
      }
      const auto hat = to_spectral(grid_, std::span<const double>(comp));
      for_each_mode(grid_, [&](std::size_t i, const Vec3& xi, double) {
        out.m[a][i] -= I * xi[off + b] * hat[i];
        if (b != a) out.m[b][i] -= I * xi[off + a] * hat[i];
      });
    }

  // viscous correction with w = P1(phi) phi m = -phi m/(1+phi)
  std::vector<ComplexField> w_hat(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < N; ++p) comp[p] = -phi[p] * m[a][p] * r[p];
    w_hat[a] = to_spectral(grid_, std::span<const double>(comp));
  }
  const double nu = params_.nu, nut = params_.nu_tilde;
  for_each_mode(grid_, [&](std::size_t i, const Vec3& xi, double q) {
    cplx div = 0.0;
    for (std::size_t a = 0; a < n; ++a) div += xi[off + a] * w_hat[a][i];
    for (std::size_t a = 0; a < n; ++a)
      out.m[a][i] += -nu * q * w_hat[a][i] - nut * xi[off + a] * div;
  });

  for (auto& c : out.m) {
    dealias(grid_, c);
    symmetrize(grid_, c);
    for (auto v : c)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::NonFinite, "nonlinear forcing is not finite");
  }
}

ForcingField eval_F(const SpectralState& u, const PhysParams& params, NonlinearLimits limits) {
  return NonlinearEvaluator(u.grid, params, limits)(u);
}

}  // namespace nsk
