#pragma once

#include <array>
#include <span>
#include <vector>

#include "nsk/params.hpp"
#include "nsk/spectral.hpp"

// Reference computations used only to check the production code. Nothing in
// here calls into the propagator, nonlinearity or analysis translation units.
namespace nsk::oracle {

/// Classical RK4 for the (1+n) mode system
///   phi' = -i xi.m,   m' = -nu q m - nu_tilde xi (xi.m) - i kappa q xi phi.
/// u0 holds (phi, m_1..m_n); the momentum components pair with the last n
/// entries of xi. Throws StabilityGuard if dt (nu + nu_tilde + sqrt kappa) q >= 0.5.
std::vector<cplx> rk4_mode(const Vec3& xi, std::span<const cplx> u0, double t, double dt,
                           const PhysParams& params);

/// Step count for rk4_mode that keeps the relative error of one mode near tol.
std::size_t rk4_steps(double xi_sq, double t, const PhysParams& params, double tol = 1e-11);

/// rk4_mode applied to every mode of a state.
SpectralState rk4_state(const SpectralState& u, double t, const PhysParams& params,
                        double tol = 1e-11);

/// exp(t M) for the longitudinal block M = [[0, -i r], [-i kappa r^3, -2 A r^2]]
/// acting on (phi_hat, xi_hat . m_hat), via cosh/sinh of the half-splitting.
std::array<std::array<cplx, 2>, 2> longitudinal_exp(double r, double t, const PhysParams& params);

/// Radial Gaussian datum: phi_hat_0 = amplitude e^{-r^2/2}; momentum in
/// derivative form m_hat_0 = i xi amplitude e^{-r^2/2}, or zero.
struct RadialProfile {
  double amplitude = 1.0;
  bool derivative_form = true;
};

/// ||grad^k u(t)||_{L^2} of the linear evolution on R^n as a 1-D integral.
/// Throws QuadratureFailure if the quadrature misses a relative tolerance of 1e-8.
double radial_linear_norm(double t, int k, const PhysParams& params, int dim,
                          RadialProfile profile = {});

/// The nonlinear forcing by explicit discrete convolutions on a grid with at
/// most 8 points per axis; rational factors by Taylor series in phi.
/// Throws AmplitudeTooLarge if sup|phi| > 0.1, InvalidGrid if the grid is too large.
SpectralState direct_nonlinearity(const SpectralState& u, const PhysParams& params);

/// Taylor coefficients c_k of P(1+phi) = sum_k c_k phi^k for k = 0..order.
std::vector<double> pressure_taylor(const PressureModel& p, int order);

}  // namespace nsk::oracle
