#pragma once

#include <optional>
#include <span>
#include <vector>

#include "nsk/frequency_split.hpp"
#include "nsk/params.hpp"
#include "nsk/spectral.hpp"

namespace nsk {

// ---------------------------------------------------------------------------
// Energy functional on the high-frequency band.
// ---------------------------------------------------------------------------

struct EnergyWeights {
  int s = 2;
  double kappa1 = 1.0;
  double kappa = 1.0, nu = 1.0, nu_tilde = 1.0;
  double r1 = 1.0;
  double c2 = 0.5;  // kappa / 2
  double c3 = 2.0;  // (nu + nu_tilde)^2 / kappa + 1
  double d1 = 0.0;  // dissipation rate in dE/dt + d1 D <= C ||F||^2

  /// C in C^{-1} ||u||^2 <= E <= C ||u||^2 on |xi| >= r1, norm H^{s+1} x H^s.
  double equivalence_constant() const;
  /// Forcing constant of the differential inequality, norm H^s x H^{s-1}.
  double apriori_constant() const;
  /// Guaranteed exponential rate of E under the linear flow on |xi| >= r1.
  double linear_rate() const;
};

/// s defaults to floor(n/2)+1; kappa1 defaults to the smallest admissible value.
/// Throws InvalidParams for s < 1 or a kappa1 override that is too small.
EnergyWeights make_energy_weights(const PhysParams& params, int dim, double r1,
                                  std::optional<int> s = std::nullopt,
                                  std::optional<double> kappa1 = std::nullopt);

struct EnergyValue {
  double E = 0.0;
  double D = 0.0;
};

/// Contribution of a single mode without the Parseval weight.
EnergyValue energy_density(double xi_sq, cplx phi, std::span<const cplx> m, cplx xi_dot_m,
                           const EnergyWeights& w);

EnergyValue energy_functional(const SpectralState& u_high, const EnergyWeights& w);

struct EnergySample {
  double t = 0.0;
  double E = 0.0;
  double D = 0.0;
  double f_norm = 0.0;  // ||F||_{H^s x H^{s-1}} of the high-frequency forcing
};

struct EnergyInequalityReport {
  std::size_t steps = 0;
  std::size_t violations = 0;
  double fraction = 0.0;
  double d = 0.0;           // dissipation coefficient used (d1/2)
  double c_bound = 0.0;     // forcing constant a step is tested against
  double c_fit = 0.0;       // smallest constant with zero violations
  double d_fit = 0.0;       // largest d with zero violations at c_bound
  double worst_excess = 0.0;
};

/// Discrete check of (E_{i+1}-E_i)/dt + d D_i <= c_bound ||F_i||^2 with d = d1/2.
EnergyInequalityReport energy_inequality_check(std::span<const EnergySample> samples,
                                               const EnergyWeights& w, double c_bound);

// ---------------------------------------------------------------------------
// Time-weighted norm.
// ---------------------------------------------------------------------------

struct SplitNormSample {
  double t = 0.0;
  double low_l2 = 0.0;         // ||u_1||
  double low_grad = 0.0;       // ||grad u_1||
  double high_sobolev = 0.0;   // ||u_inf||_{H^{s+1} x H^s}
  double high_grad = 0.0;      // ||grad u_inf||
};

SplitNormSample split_norms(const SpectralState& u, const Cutoff& cutoff, int s);

struct ZNorm {
  double low = 0.0;          // sum_j sup (1+t)^{n/4+j/2} ||grad^j u_1||
  double high_sup = 0.0;     // sup (1+t)^{n/4+1/2} ||u_inf||_{H^{s+1} x H^s}
  double high_l2 = 0.0;      // ||grad u_inf||_{L^2(0,T)}
  double history = 0.0;      // sup (1+t)^{n/4+1/2} (int e^{-C2(t-tau)} (1+tau)^{-n/2-1} ||grad u_inf||^2)^{1/2}
  double total() const { return low + high_sup + high_l2 + history; }
};

/// Running Z-norm over samples added in increasing time (trapezoidal rule).
class ZNormAccumulator {
 public:
  ZNormAccumulator(int dim, double C2) : dim_(dim), C2_(C2) {}
  void add(const SplitNormSample& s);
  const ZNorm& value() const noexcept { return z_; }
  /// The inner history integral at the last sample.
  double history_integral() const noexcept { return hist_; }

 private:
  int dim_;
  double C2_;
  ZNorm z_{};
  double sup_low0_ = 0.0, sup_low1_ = 0.0;
  double l2_sq_ = 0.0, hist_ = 0.0;
  std::optional<SplitNormSample> last_;
};

ZNorm z_norm(std::span<const SplitNormSample> samples, int dim, double C2);
/// History integral H(t_i) at every sample.
std::vector<double> history_integral(std::span<const SplitNormSample> samples, int dim, double C2);

// ---------------------------------------------------------------------------
// Decay fits.
// ---------------------------------------------------------------------------

struct DecayFit {
  double t_a = 0.0, t_b = 0.0;
  std::size_t samples = 0;
  double exponent = 0.0;
  double half_width = 0.0;
  double target = 0.0;
  double tolerance = 0.05;
  bool pass = false;
};

/// Least-squares slope of log norm against log(1+t) inside [t_a, t_b].
/// Throws InsufficientWindow with fewer than 10 samples or a non-positive norm.
DecayFit decay_fit(std::span<const double> times, std::span<const double> norms, int k, int dim,
                   double t_a, double t_b, double tolerance = 0.05);

/// Slope of log y against log x over all points (no window checks).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct K12Report {
  std::vector<double> times;
  std::vector<double> norms;
  double exponent = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// ||K12(t)||^2 = c_n int_0^{2 r_inf} |D1(t;r)|^2 r^4 chi0(r)^2 r^{n-1} dr,
/// chi0(r) = smooth_step((r - r_inf)/r_inf); exponent fitted against log t.
double k12_norm(double t, const PhysParams& params, int dim, double r_inf);
K12Report k12_bound_check(std::span<const double> times, const PhysParams& params, int dim,
                          double r_inf, double margin = 0.03);

/// |S^{n-1}| / (2 pi)^n.
double sphere_factor(int dim);

}  // namespace nsk
