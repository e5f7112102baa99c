#pragma once

#include <limits>
#include <span>
#include <vector>

#include "nsk/params.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

/// The forcing has no density component; phi is kept (and kept zero) so the
/// result can be combined with states directly.
using ForcingField = SpectralState;

/// P1(phi) = -1/(1+phi). Throws VacuumApproach if min(1+phi) <= rho_min.
RealField p1_factor(std::span<const double> phi, double rho_min = 0.1);

/// P2(phi) = int_0^1 (1-tau) P''(1+tau phi) dtau by 16-point Gauss-Legendre.
RealField p2_factor(std::span<const double> phi, const PressureModel& pressure);
double p2_point(double phi, const PressureModel& pressure);

/// div Phi(phi) with Phi = kappa {(phi Lap phi + |grad phi|^2/2) I - grad phi (x) grad phi},
/// assembled in physical space. Input and output are two-thirds truncated.
std::vector<ComplexField> korteweg_divergence(const Grid& grid, std::span<const cplx> phi_hat,
                                              double kappa);

struct NonlinearLimits {
  /// Largest admissible sup |phi|; infinity disables the check.
  double amplitude_guard = std::numeric_limits<double>::infinity();
};

/// Pseudo-spectral F(u) for the momentum equation:
///   F = -div(m (x) m/(1+phi) + P2 phi^2 I - Phi) + nu Lap w + nu_tilde grad div w,
///   w = P1(phi) phi m.
/// Inputs are truncated with the two-thirds rule, products are formed in
/// physical space, derivatives are spectral. The output is truncated and
/// Hermitian-symmetrized.
class NonlinearEvaluator {
 public:
  NonlinearEvaluator(const Grid& grid, const PhysParams& params, NonlinearLimits limits = {});

  ForcingField operator()(const SpectralState& u) const;
  void evaluate(const SpectralState& u, ForcingField& out) const;

  const Grid& grid() const noexcept { return grid_; }
  const PhysParams& params() const noexcept { return params_; }

 private:
  Grid grid_;
  PhysParams params_;
  NonlinearLimits limits_;
};

ForcingField eval_F(const SpectralState& u, const PhysParams& params, NonlinearLimits limits = {});

}  // namespace nsk
