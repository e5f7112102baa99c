#pragma once

#include <array>
#include <span>
#include <vector>

#include "nsk/params.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

enum class Regime { overdamped, critical, oscillatory };

/// Roots of lambda^2 + 2 A q lambda + kappa q^2 = 0 with q = |xi|^2.
/// lambda_plus is the fast root (larger |Re|) when the roots are real.
struct EigenPair {
  cplx lambda_plus;
  cplx lambda_minus;
  Regime regime;
};

EigenPair eigenvalues(double xi_sq, const PhysParams& params);

/// (e^z - 1) / z, continuous at z = 0.
cplx phi1(cplx z);

/// Divided difference of exp over the given nodes (repeated nodes allowed):
/// exp[z0] = e^{z0}, exp[z0, z1] = (e^{z0} - e^{z1}) / (z0 - z1), ...
cplx exp_divided_difference(std::span<const cplx> nodes);

/// (e^{lp t} - e^{lm t}) / (lp - lm), with the confluent value t e^{lp t}.
cplx divided_difference(cplx lp, cplx lm, double t);

/// Which scalar function of the generator a table represents:
/// exp (the semigroup), phi1(z) = (e^z-1)/z, phi2(z) = (e^z-1-z)/z^2.
enum class MatrixFunction { exp, phi1, phi2 };

/// Real per-mode coefficients of f(h L_xi) in longitudinal/transverse form.
///   a : phi -> phi
///   b : h f[mu+, mu-], the off-diagonal scale
///   d : longitudinal momentum diagonal
///   e : transverse factor f(-nu q h)
/// With s = xi . m the update is
///   phi' = a phi - i b s
///   m'   = e m + xi (-i b kappa q phi + (d - e) s / q)
struct ModeCoefficients {
  double a = 1.0, b = 0.0, d = 1.0, e = 1.0;
};

ModeCoefficients mode_coefficients(double xi_sq, double h, const PhysParams& params,
                                   MatrixFunction f = MatrixFunction::exp);

/// The (1+n)x(1+n) solution operator at one mode in factored form:
///   S = [[s11, s12^T], [s21, s22_transverse I + s22_longitudinal xi xi^T / |xi|^2]].
struct ModePropagator {
  int dim = 3;
  Vec3 xi{};
  cplx s11{1.0};
  std::array<cplx, 3> s12{};
  std::array<cplx, 3> s21{};
  cplx s22_transverse{1.0};
  cplx s22_longitudinal{0.0};

  /// Dense row-major (1+dim)^2 matrix; only for checks and small problems.
  std::vector<cplx> dense() const;
  /// y = S x for a (1+dim)-vector.
  std::vector<cplx> apply(std::span<const cplx> x) const;
};

ModePropagator mode_propagator(const Vec3& xi, int dim, double t, const PhysParams& params,
                               MatrixFunction f = MatrixFunction::exp);

/// Coefficients for every mode of a grid at one step size. Nyquist modes
/// are mapped to zero.
struct PropagatorTable {
  Grid grid;
  double h = 0.0;
  MatrixFunction function = MatrixFunction::exp;
  double kappa = 1.0;
  std::vector<ModeCoefficients> coeffs;
};

PropagatorTable make_table(const Grid& grid, double h, const PhysParams& params,
                           MatrixFunction f = MatrixFunction::exp);

/// out = scale * f(h L) u, mode by mode. out may alias nothing in u.
void apply_table(const PropagatorTable& table, const SpectralState& u, SpectralState& out,
                 double scale = 1.0);
/// out += scale * f(h L) u.
void accumulate_table(const PropagatorTable& table, const SpectralState& u, SpectralState& out,
                      double scale);

SpectralState apply_semigroup(const SpectralState& state, double t, const PhysParams& params);

}  // namespace nsk
