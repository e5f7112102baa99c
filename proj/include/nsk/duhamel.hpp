#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsk/analysis.hpp"
#include "nsk/frequency_split.hpp"
#include "nsk/nonlinearity.hpp"
#include "nsk/params.hpp"
#include "nsk/propagator.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

enum class Scheme { etd1, etd_rk2 };

struct StepperConfig {
  double dt = 0.05;
  double t_end = 1.0;
  Scheme scheme = Scheme::etd_rk2;
  bool adapt = false;
  double target_error = 1e-8;  // relative local error per unit time
  double dt_min = 1e-6;
  double dt_max = 1.0;
  double amplitude_guard = 0.5;
  bool nonlinear = true;
  double sample_every = 0.0;  // 0: sample after every step
  double blowup_factor = 1e6;
  bool store_states = false;
  bool capture_failures = false;  // record the failure in the trajectory instead of throwing
};

void validate(const StepperConfig& cfg);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralState> states;  // only with store_states
  std::size_t steps = 0;
  std::size_t rejected = 0;
  bool vacuum = false;
  bool blowup = false;
  std::string failure;
};

/// Exponential time differencing with the exact per-mode propagator.
///   etd1:    u+ = S(h) u + h phi1(hL) N(u)
///   etd_rk2: a = etd1 result;  u+ = a + h phi2(hL) (N(a) - N(u))
/// Coefficient tables are cached by step size.
class EtdStepper {
 public:
  EtdStepper(const Grid& grid, const PhysParams& params, Scheme scheme, bool nonlinear = true,
             double amplitude_guard = 0.5);

  /// Advances u by h. N(u) may be passed in when already known.
  SpectralState step(const SpectralState& u, double h,
                     const ForcingField* N_u = nullptr);
  /// Embedded pair: returns the etd_rk2 result and ||rk2 - etd1|| / ||u||.
  std::pair<SpectralState, double> step_with_error(const SpectralState& u, double h,
                                                   const ForcingField* N_u = nullptr);

  ForcingField forcing(const SpectralState& u) const;
  bool nonlinear() const noexcept { return nonlinear_; }

 private:
  struct Tables {
    PropagatorTable e, p1, p2;
  };
  const Tables& tables(double h);

  Grid grid_;
  PhysParams params_;
  Scheme scheme_;
  bool nonlinear_;
  NonlinearEvaluator eval_;
  std::map<double, std::unique_ptr<Tables>> cache_;
};

SpectralState etd_step(const SpectralState& u, double dt, const PhysParams& params, Scheme scheme,
                       bool nonlinear = true);

/// Called at every sample with (t, u(t), N(u(t))).
using SampleHook =
    std::function<void(double, const SpectralState&, const ForcingField&)>;

Trajectory simulate(const SpectralState& u0, const StepperConfig& cfg, const PhysParams& params,
                    const SampleHook& hook = {});

// ---------------------------------------------------------------------------
// Picard iteration of the Duhamel map on a uniform time mesh.
// ---------------------------------------------------------------------------

struct PicardConfig {
  double horizon = 10.0;
  int intervals = 50;
  int k_max = 25;
  double stop_below = 1e-12;
  double C2 = 1.0;
  int s = 2;
  bool nonlinear = true;
  double amplitude_guard = 0.5;
};

struct PicardIterate {
  int k = 0;
  double d_k = 0.0;
  double ratio = 0.0;  // d_k / d_{k-1}; 0 for k = 1
  ZNorm z{};
};

struct PicardDiagnostics {
  std::vector<PicardIterate> iterates;
  std::vector<double> mesh;
  bool non_contracting = false;
  bool converged = false;
  /// Z-norm of the final iterate itself.
  ZNorm solution{};
};

/// u^(0)(t) = S(t) u0 and u^(k) = S(t) u0 + int_0^t S(t-tau) N(u^(k-1)(tau)) dtau,
/// with the integral taken by 3-point Gauss on each mesh interval and N
/// interpolated linearly between mesh values.
PicardDiagnostics picard_iterate(const SpectralState& u0, const PicardConfig& cfg,
                                 const PhysParams& params, const Cutoff& cutoff);

}  // namespace nsk
