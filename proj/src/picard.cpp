#include <array>
#include <cmath>

#include "nsk/duhamel.hpp"
#include "nsk/error.hpp"

namespace nsk {

namespace {
// 3-point Gauss-Legendre on [0, 1]
const std::array<double, 3> kNodes{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
constexpr std::array<double, 3> kWeights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
}  // namespace

PicardDiagnostics picard_iterate(const SpectralState& u0, const PicardConfig& cfg,
                                 const PhysParams& params, const Cutoff& cutoff) {
  if (!(cfg.horizon > 0.0) || cfg.intervals < 1 || cfg.k_max < 1)
    throw Error(ErrorKind::ConfigError, "picard needs horizon > 0, intervals >= 1, k_max >= 1");
  if (!(cutoff.grid == u0.grid)) throw Error(ErrorKind::ShapeMismatch, "cutoff grid vs state");
  validate(params);

  const Grid& grid = u0.grid;
  const auto M = static_cast<std::size_t>(cfg.intervals);
  const double h = cfg.horizon / cfg.intervals;
  const int dim = grid.dim();

  const auto step_table = make_table(grid, h, params);
  std::array<PropagatorTable, 3> node_tables;
  for (std::size_t g = 0; g < 3; ++g) node_tables[g] = make_table(grid, h * (1.0 - kNodes[g]), params);

  const NonlinearEvaluator eval(grid, params, NonlinearLimits{cfg.amplitude_guard});
  auto N = [&](const SpectralState& u) {
    return cfg.nonlinear ? eval(u) : SpectralState::zeros(grid);
  };

  PicardDiagnostics diag;
  for (std::size_t i = 0; i <= M; ++i) diag.mesh.push_back(static_cast<double>(i) * h);

  // zeroth iterate: the free evolution
  std::vector<SpectralState> U(M + 1), F(M + 1);
  U[0] = u0;
  for (std::size_t i = 0; i < M; ++i) {
    U[i + 1] = SpectralState::zeros(grid);
    apply_table(step_table, U[i], U[i + 1]);
  }
  for (std::size_t i = 0; i <= M; ++i) F[i] = N(U[i]);

  int above_one = 0;
  double d_prev = 0.0;
  SpectralState next = SpectralState::zeros(grid);
  SpectralState mixed = SpectralState::zeros(grid);
  for (int k = 1; k <= cfg.k_max; ++k) {
    ZNormAccumulator dist(dim, cfg.C2), sol(dim, cfg.C2);
    dist.add(SplitNormSample{0.0, 0.0, 0.0, 0.0, 0.0});
    auto s0 = split_norms(U[0], cutoff, cfg.s);
    s0.t = 0.0;
    sol.add(s0);

    for (std::size_t i = 0; i < M; ++i) {
      // U[i] already holds the new iterate; F[i], F[i+1] still hold the old forcing
      apply_table(step_table, U[i], next);
      for (std::size_t g = 0; g < 3; ++g) {
        mixed = F[i];
        mixed *= 1.0 - kNodes[g];
        mixed.axpy(kNodes[g], F[i + 1]);
        accumulate_table(node_tables[g], mixed, next, h * kWeights[g]);
      }
      auto sd = split_norms(next - U[i + 1], cutoff, cfg.s);
      sd.t = diag.mesh[i + 1];
      dist.add(sd);
      auto sn = split_norms(next, cutoff, cfg.s);
      sn.t = diag.mesh[i + 1];
      sol.add(sn);

      F[i] = N(U[i]);
      std::swap(U[i + 1], next);
    }
    F[M] = N(U[M]);

    PicardIterate it;
    it.k = k;
    it.z = dist.value();
    it.d_k = it.z.total();
    it.ratio = (k > 1 && d_prev > 0.0) ? it.d_k / d_prev : 0.0;
    diag.iterates.push_back(it);
    diag.solution = sol.value();

    if (k > 1 && it.ratio > 1.0) {
      if (++above_one >= 3) {
        diag.non_contracting = true;
        break;
      }
    } else {
      above_one = 0;
    }
    if (it.d_k < cfg.stop_below) {
      diag.converged = true;
      break;
    }
    d_prev = it.d_k;
  }
  return diag;
}

}  // namespace nsk
