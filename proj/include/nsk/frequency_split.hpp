#pragma once

#include <vector>

#include "nsk/spectral.hpp"

namespace nsk {

/// Smooth step: 1 for s <= 0, 0 for s >= 1, h(1-s)/(h(s)+h(1-s)) between,
/// with h(s) = exp(-1/s).
double smooth_step(double s);

/// Low/high frequency multipliers chi1 + chi_inf = 1 on a grid.
struct Cutoff {
  Grid grid;
  double r1 = 1.0;
  double r_inf = 2.0;
  std::vector<double> chi1;
  std::vector<double> chi_inf;
};

/// Throws InvalidCutoff unless 0 < r1 < r_inf <= pi N / L.
Cutoff make_cutoff(const Grid& grid, double r1, double r_inf);

SpectralState project_low(const Cutoff& cutoff, const SpectralState& u);
SpectralState project_high(const Cutoff& cutoff, const SpectralState& u);

struct PoincareReport {
  double ratio = 0.0;  // ||u|| / ||grad u||
  double bound = 0.0;  // 1 / r1
  bool holds = true;
};

/// Checks ||u|| <= ||grad u|| / r1 for a state without modes inside |xi| < r1.
/// Throws SupportViolation if such modes carry more than 1e-13 of the mass.
PoincareReport poincare_constant_check(const SpectralState& u, double r1);

}  // namespace nsk
