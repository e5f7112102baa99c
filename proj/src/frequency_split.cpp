#include "nsk/frequency_split.hpp"

#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

double smooth_step(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double hs = std::exp(-1.0 / s);
  const double ht = std::exp(-1.0 / (1.0 - s));
  return ht / (hs + ht);
}

Cutoff make_cutoff(const Grid& grid, double r1, double r_inf) {
  if (!(r1 > 0.0) || !(r_inf > r1))
    throw Error(ErrorKind::InvalidCutoff, "need 0 < r1 < r_inf");
  if (r_inf > grid.max_frequency() * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidCutoff,
                "r_inf exceeds the resolvable frequency pi N / L = " +
                    std::to_string(grid.max_frequency()));
  Cutoff c;
  c.grid = grid;
  c.r1 = r1;
  c.r_inf = r_inf;
  c.chi1.resize(grid.size());
  c.chi_inf.resize(grid.size());
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) {
    const double v = smooth_step((std::sqrt(q) - r1) / (r_inf - r1));
    c.chi1[i] = v;
    c.chi_inf[i] = 1.0 - v;
  });
  return c;
}

namespace {
SpectralState multiply(const Grid& grid, const std::vector<double>& chi, const SpectralState& u) {
  if (!(grid == u.grid)) throw Error(ErrorKind::ShapeMismatch, "cutoff built on another grid");
  SpectralState out = u;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    out.phi[i] *= chi[i];
    for (auto& c : out.m) c[i] *= chi[i];
  }
  return out;
}
}  // namespace

SpectralState project_low(const Cutoff& cutoff, const SpectralState& u) {
  return multiply(cutoff.grid, cutoff.chi1, u);
}

SpectralState project_high(const Cutoff& cutoff, const SpectralState& u) {
  return multiply(cutoff.grid, cutoff.chi_inf, u);
}

PoincareReport poincare_constant_check(const SpectralState& u, double r1) {
  double low = 0.0, total = 0.0;
  for_each_mode(u.grid, [&](std::size_t i, const Vec3&, double q) {
    double e = std::norm(u.phi[i]);
    for (const auto& c : u.m) e += std::norm(c[i]);
    total += e;
    if (q < r1 * r1 * (1.0 - 1e-12)) low += e;
  });
  if (total > 0.0 && low > 1e-13 * total)
    throw Error(ErrorKind::SupportViolation, "state has mass inside |xi| < r1");
  PoincareReport rep;
  rep.bound = 1.0 / r1;
  const double g = seminorm(u, 1);
  rep.ratio = g > 0.0 ? seminorm(u, 0) / g : 0.0;
  rep.holds = rep.ratio <= rep.bound * (1.0 + 1e-13);
  return rep;
}

}  // namespace nsk
