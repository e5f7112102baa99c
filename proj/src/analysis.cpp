#include "nsk/analysis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nsk/error.hpp"
#include "nsk/propagator.hpp"

namespace nsk {

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

double EnergyWeights::equivalence_constant() const {
  const double upper = 1.5 * kappa1 * std::max(kappa, 1.0);
  const double lower = 2.0 * (1.0 + 1.0 / (r1 * r1)) / (kappa1 * std::min(kappa, 1.0));
  return std::max(upper, lower);
}

double EnergyWeights::apriori_constant() const {
  return (4.0 * kappa1 * kappa1 + 1.0) / d1 * (1.0 + 1.0 / (r1 * r1));
}

double EnergyWeights::linear_rate() const {
  return d1 * r1 * r1 / (1.5 * kappa1 * std::max(kappa, 1.0));
}

EnergyWeights make_energy_weights(const PhysParams& params, int dim, double r1,
                                  std::optional<int> s, std::optional<double> kappa1) {
  validate(params);
  EnergyWeights w;
  w.s = s.value_or(dim / 2 + 1);
  if (w.s < 1) throw Error(ErrorKind::InvalidParams, "Sobolev order s must be at least 1");
  if (!(r1 > 0.0)) throw Error(ErrorKind::InvalidParams, "r1 must be positive");
  w.kappa = params.kappa;
  w.nu = params.nu;
  w.nu_tilde = params.nu_tilde;
  w.r1 = r1;
  w.c2 = 0.5 * params.kappa;
  const double sum = params.nu + params.nu_tilde;
  w.c3 = sum * sum / params.kappa + 1.0;

  const double A = params.A();
  double k1 = std::max({1.0, 1.0 / params.kappa, 4.0 * w.c3 / params.nu});
  if (params.nu_tilde > 0.0) k1 = std::max(k1, 2.0 * w.c3 / params.nu_tilde);
  // the longitudinal momentum coefficient 4 k1 A - 1 - 2A^2/kappa must stay positive
  const double k1_floor = (1.0 + 2.0 * A * A / params.kappa) / (4.0 * A);
  if (k1 <= k1_floor) k1 = 2.0 * k1_floor;
  if (kappa1) {
    if (*kappa1 < k1)
      throw Error(ErrorKind::InvalidParams,
                  "kappa1 override below the admissible minimum " + std::to_string(k1));
    k1 = *kappa1;
  }
  w.kappa1 = k1;
  w.d1 = std::min({0.5 * params.kappa, 4.0 * k1 * A - 1.0 - 2.0 * A * A / params.kappa,
                   2.0 * k1 * params.nu});
  return w;
}

EnergyValue energy_density(double q, cplx phi, std::span<const cplx> m, cplx s,
                           const EnergyWeights& w) {
  double weight = 0.0, qj = 1.0;
  for (int j = 0; j <= w.s; ++j, qj *= q) weight += qj;
  double m2 = 0.0;
  for (auto v : m) m2 += std::norm(v);
  const double p2 = std::norm(phi);
  EnergyValue e;
  e.E = weight * (w.kappa1 * (w.kappa * q * p2 + m2) + (s * std::conj(phi)).imag());
  e.D = weight * (q * q * p2 + q * m2);
  return e;
}

EnergyValue energy_functional(const SpectralState& u, const EnergyWeights& w) {
  const auto n = static_cast<std::size_t>(u.dim());
  const std::size_t off = 3 - n;
  std::vector<double> Es(u.size()), Ds(u.size());
  std::array<cplx, 3> m{};
  for_each_mode(u.grid, [&](std::size_t i, const Vec3& xi, double q) {
    cplx s = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      m[a] = u.m[a][i];
      s += xi[off + a] * m[a];
    }
    const auto e = energy_density(q, u.phi[i], std::span<const cplx>(m.data(), n), s, w);
    Es[i] = e.E;
    Ds[i] = e.D;
  });
  const double pw = u.grid.parseval_weight();
  return {pw * pairwise_sum(Es), pw * pairwise_sum(Ds)};
}

EnergyInequalityReport energy_inequality_check(std::span<const EnergySample> samples,
                                               const EnergyWeights& w, double c_bound) {
  EnergyInequalityReport r;
  r.d = 0.5 * w.d1;
  r.c_bound = c_bound;
  r.d_fit = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const double dt = samples[i + 1].t - samples[i].t;
    if (!(dt > 0.0)) continue;
    ++r.steps;
    const double rate = (samples[i + 1].E - samples[i].E) / dt;
    const double lhs = rate + r.d * samples[i].D;
    const double f2 = samples[i].f_norm * samples[i].f_norm;
    if (lhs > 0.0) {
      const double need = f2 > 0.0 ? lhs / f2 : std::numeric_limits<double>::infinity();
      r.c_fit = std::max(r.c_fit, need);
    }
    const double excess = lhs - c_bound * f2;
    if (excess > 0.0) {
      ++r.violations;
      r.worst_excess = std::max(r.worst_excess, excess);
    }
    if (samples[i].D > 0.0) r.d_fit = std::min(r.d_fit, (c_bound * f2 - rate) / samples[i].D);
  }
  r.fraction = r.steps ? static_cast<double>(r.violations) / static_cast<double>(r.steps) : 0.0;
  if (!std::isfinite(r.d_fit)) r.d_fit = 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Z-norm
// ---------------------------------------------------------------------------

SplitNormSample split_norms(const SpectralState& u, const Cutoff& cutoff, int s) {
  const auto low = project_low(cutoff, u);
  const auto high = project_high(cutoff, u);
  SplitNormSample out;
  out.low_l2 = seminorm(low, 0);
  out.low_grad = seminorm(low, 1);
  out.high_sobolev = sobolev_norm(high, s + 1, s);
  out.high_grad = seminorm(high, 1);
  return out;
}

void ZNormAccumulator::add(const SplitNormSample& s) {
  const double n4 = dim_ / 4.0;
  const double tp = 1.0 + s.t;
  sup_low0_ = std::max(sup_low0_, std::pow(tp, n4) * s.low_l2);
  sup_low1_ = std::max(sup_low1_, std::pow(tp, n4 + 0.5) * s.low_grad);
  z_.low = sup_low0_ + sup_low1_;
  z_.high_sup = std::max(z_.high_sup, std::pow(tp, n4 + 0.5) * s.high_sobolev);

  const double g_new = std::pow(tp, -0.5 * dim_ - 1.0) * s.high_grad * s.high_grad;
  if (last_) {
    const double dt = s.t - last_->t;
    if (!(dt > 0.0)) throw Error(ErrorKind::InvalidParams, "samples must increase in time");
    l2_sq_ += 0.5 * dt * (last_->high_grad * last_->high_grad + s.high_grad * s.high_grad);
    const double g_old =
        std::pow(1.0 + last_->t, -0.5 * dim_ - 1.0) * last_->high_grad * last_->high_grad;
    const double decay = std::exp(-C2_ * dt);
    hist_ = decay * hist_ + 0.5 * dt * (decay * g_old + g_new);
  }
  z_.high_l2 = std::sqrt(l2_sq_);
  z_.history = std::max(z_.history, std::pow(tp, n4 + 0.5) * std::sqrt(hist_));
  last_ = s;
}

ZNorm z_norm(std::span<const SplitNormSample> samples, int dim, double C2) {
  ZNormAccumulator acc(dim, C2);
  for (const auto& s : samples) acc.add(s);
  return acc.value();
}

std::vector<double> history_integral(std::span<const SplitNormSample> samples, int dim,
                                     double C2) {
  ZNormAccumulator acc(dim, C2);
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    acc.add(s);
    out.push_back(acc.history_integral());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

namespace {
struct LineFit {
  double slope, stderr_slope;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - my - slope * (x[i] - mx);
    rss += r * r;
  }
  const double se = x.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return {slope, se};
}
}  // namespace

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly).slope;
}

DecayFit decay_fit(std::span<const double> times, std::span<const double> norms, int k, int dim,
                   double t_a, double t_b, double tolerance) {
  if (times.size() != norms.size())
    throw Error(ErrorKind::ShapeMismatch, "times and norms differ in length");
  DecayFit fit;
  fit.t_a = t_a;
  fit.t_b = t_b;
  fit.target = -dim / 4.0 - k / 2.0;
  fit.tolerance = tolerance;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_a || times[i] > t_b) continue;
    if (!(norms[i] > 0.0))
      throw Error(ErrorKind::InsufficientWindow, "non-positive norm inside the fit window");
    lx.push_back(std::log1p(times[i]));
    ly.push_back(std::log(norms[i]));
  }
  fit.samples = lx.size();
  if (lx.size() < 10)
    throw Error(ErrorKind::InsufficientWindow,
                "only " + std::to_string(lx.size()) + " samples inside the fit window");
  const auto line = fit_line(lx, ly);
  fit.exponent = line.slope;
  fit.half_width = 2.0 * line.stderr_slope;
  fit.pass = std::abs(fit.exponent - fit.target) <= tolerance;
  return fit;
}

// ---------------------------------------------------------------------------
// K12 kernel
// ---------------------------------------------------------------------------

double sphere_factor(int dim) {
  const double area = 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
  return area / std::pow(2.0 * M_PI, dim);
}

double k12_norm(double t, const PhysParams& params, int dim, double r_inf) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidParams, "K12 needs t > 0");
  const double st = std::sqrt(t);
  // r = eta / sqrt(t)
  auto integrand = [&](double eta) {
    const double r = eta / st;
    const auto ev = eigenvalues(r * r, params);
    const double d1 = std::abs(divided_difference(ev.lambda_plus, ev.lambda_minus, t));
    const double chi = smooth_step((r - r_inf) / r_inf);
    return d1 * d1 * std::pow(r, 4 + dim - 1) * chi * chi / st;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double upper = 2.0 * r_inf * st;
  const double val = GK::integrate(integrand, 0.0, upper, 30, 1e-11, &err);
  if (!std::isfinite(val) || err > 1e-6 * std::abs(val) + 1e-300)
    throw Error(ErrorKind::QuadratureFailure, "K12 integral did not converge");
  return std::sqrt(sphere_factor(dim) * val);
}

K12Report k12_bound_check(std::span<const double> times, const PhysParams& params, int dim,
                          double r_inf, double margin) {
  K12Report rep;
  for (double t : times) {
    rep.times.push_back(t);
    rep.norms.push_back(k12_norm(t, params, dim, r_inf));
  }
  rep.exponent = loglog_slope(rep.times, rep.norms);
  rep.bound = -dim / 4.0 + margin;
  rep.pass = rep.exponent <= rep.bound;
  return rep;
}

}  // namespace nsk
