#include "nsk/duhamel.hpp"

#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

void validate(const StepperConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw Error(ErrorKind::ConfigError, "stepper dt must be positive");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end))
    throw Error(ErrorKind::ConfigError, "stepper t_end must be non-negative");
  if (cfg.sample_every < 0.0) throw Error(ErrorKind::ConfigError, "sample_every must be >= 0");
  if (cfg.adapt && !(cfg.target_error > 0.0))
    throw Error(ErrorKind::ConfigError, "target_error must be positive");
  if (!(cfg.amplitude_guard > 0.0))
    throw Error(ErrorKind::ConfigError, "amplitude_guard must be positive");
}

EtdStepper::EtdStepper(const Grid& grid, const PhysParams& params, Scheme scheme, bool nonlinear,
                       double amplitude_guard)
    : grid_(grid),
      params_(params),
      scheme_(scheme),
      nonlinear_(nonlinear),
      eval_(grid, params, NonlinearLimits{amplitude_guard}) {}

const EtdStepper::Tables& EtdStepper::tables(double h) {
  auto it = cache_.find(h);
  if (it == cache_.end()) {
    auto t = std::make_unique<Tables>();
    t->e = make_table(grid_, h, params_, MatrixFunction::exp);
    t->p1 = make_table(grid_, h, params_, MatrixFunction::phi1);
    t->p2 = make_table(grid_, h, params_, MatrixFunction::phi2);
    it = cache_.emplace(h, std::move(t)).first;
    // a long adaptive run can visit many step sizes; keep the cache bounded
    if (cache_.size() > 16) {
      for (auto jt = cache_.begin(); jt != cache_.end();)
        jt = (jt->first == h) ? std::next(jt) : cache_.erase(jt);
      it = cache_.find(h);
    }
  }
  return *it->second;
}

ForcingField EtdStepper::forcing(const SpectralState& u) const {
  if (!nonlinear_) return SpectralState::zeros(grid_);
  return eval_(u);
}

std::pair<SpectralState, double> EtdStepper::step_with_error(const SpectralState& u, double h,
                                                             const ForcingField* N_u) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParams, "step size must be positive");
  const auto& tb = tables(h);
  SpectralState a = SpectralState::zeros(grid_);
  apply_table(tb.e, u, a);
  if (!nonlinear_) return {std::move(a), 0.0};

  ForcingField own;
  if (!N_u) {
    own = eval_(u);
    N_u = &own;
  }
  accumulate_table(tb.p1, *N_u, a, h);
  auto diff = eval_(a);
  diff -= *N_u;
  SpectralState out = a;
  accumulate_table(tb.p2, diff, out, h);
  const double scale = seminorm(u, 0);
  const double err = seminorm(out - a, 0);
  return {std::move(out), scale > 0.0 ? err / scale : err};
}

SpectralState EtdStepper::step(const SpectralState& u, double h, const ForcingField* N_u) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidParams, "step size must be positive");
  if (scheme_ == Scheme::etd_rk2) return step_with_error(u, h, N_u).first;
  const auto& tb = tables(h);
  SpectralState a = SpectralState::zeros(grid_);
  apply_table(tb.e, u, a);
  if (!nonlinear_) return a;
  if (N_u) {
    accumulate_table(tb.p1, *N_u, a, h);
  } else {
    accumulate_table(tb.p1, eval_(u), a, h);
  }
  return a;
}

SpectralState etd_step(const SpectralState& u, double dt, const PhysParams& params, Scheme scheme,
                       bool nonlinear) {
  EtdStepper st(u.grid, params, scheme, nonlinear, std::numeric_limits<double>::infinity());
  return st.step(u, dt);
}

Trajectory simulate(const SpectralState& u0, const StepperConfig& cfg, const PhysParams& params,
                    const SampleHook& hook) {
  validate(cfg);
  validate(params);
  Trajectory traj;
  EtdStepper stepper(u0.grid, params, cfg.scheme, cfg.nonlinear, cfg.amplitude_guard);

  const double eps = 1e-12 * std::max(1.0, cfg.t_end);
  const double n0 = seminorm(u0, 0);
  SpectralState u = u0;
  double t = 0.0;
  double h = cfg.dt;
  double next_sample = cfg.sample_every > 0.0 ? cfg.sample_every : 0.0;

  auto record = [&](const ForcingField& F) {
    traj.times.push_back(t);
    if (cfg.store_states) traj.states.push_back(u);
    if (hook) hook(t, u, F);
  };

  try {
    ForcingField F = stepper.forcing(u);
    record(F);
    while (t < cfg.t_end - eps) {
      double target = cfg.t_end;
      if (cfg.sample_every > 0.0) target = std::min(target, next_sample);
      double hh = std::min(h, target - t);

      SpectralState next;
      if (cfg.adapt && cfg.nonlinear) {
        for (;;) {
          auto [v, err] = stepper.step_with_error(u, hh, &F);
          if (err <= cfg.target_error * hh || hh <= cfg.dt_min) {
            next = std::move(v);
            if (err < 0.25 * cfg.target_error * hh && hh == h) h = std::min(2.0 * h, cfg.dt_max);
            break;
          }
          ++traj.rejected;
          hh *= 0.5;
          h = hh;
        }
      } else {
        next = stepper.step(u, hh, &F);
      }
      t = (std::abs(t + hh - target) <= eps) ? target : t + hh;
      u = std::move(next);
      ++traj.steps;

      const double nrm = seminorm(u, 0);
      if (!std::isfinite(nrm)) throw Error(ErrorKind::NonFinite, "state norm is not finite");
      if (n0 > 0.0 && nrm > cfg.blowup_factor * n0)
        throw Error(ErrorKind::Blowup, "norm grew by more than the blowup factor at t = " +
                                           std::to_string(t));

      F = stepper.forcing(u);
      const bool at_sample =
          cfg.sample_every <= 0.0 || t >= next_sample - eps || t >= cfg.t_end - eps;
      if (at_sample) {
        record(F);
        if (cfg.sample_every > 0.0)
          while (next_sample <= t + eps) next_sample += cfg.sample_every;
      }
    }
  } catch (const Error& e) {
    if (!cfg.capture_failures) throw;
    traj.failure = e.what();
    traj.vacuum = e.kind() == ErrorKind::VacuumApproach || e.kind() == ErrorKind::DensityWindow;
    traj.blowup = e.kind() == ErrorKind::Blowup || e.kind() == ErrorKind::NonFinite;
  }
  return traj;
}

}  // namespace nsk
