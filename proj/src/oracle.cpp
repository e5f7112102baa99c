#include "nsk/oracle.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>

#include "nsk/error.hpp"

namespace nsk::oracle {

namespace {
constexpr cplx I{0.0, 1.0};

double q_of(const Vec3& xi) { return xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]; }

double spectral_radius_bound(double q, const PhysParams& p) {
  const double A = 0.5 * (p.nu + p.nu_tilde);
  const double disc = A * A - p.kappa;
  const double fast = disc >= 0.0 ? (A + std::sqrt(disc)) * q : std::sqrt(p.kappa) * q;
  return std::max(fast, p.nu * q);
}
}  // namespace

std::vector<cplx> rk4_mode(const Vec3& xi, std::span<const cplx> u0, double t, double dt,
                           const PhysParams& p) {
  const std::size_t n = u0.size() - 1;
  if (u0.empty() || n > 3) throw Error(ErrorKind::ShapeMismatch, "mode vector must hold 2..4 entries");
  const std::size_t off = 3 - n;
  const double q = q_of(xi);
  if (dt * (p.nu + p.nu_tilde + std::sqrt(p.kappa)) * q >= 0.5)
    throw Error(ErrorKind::StabilityGuard, "rk4 step too large for this mode");

  auto rhs = [&](const std::vector<cplx>& u) {
    std::vector<cplx> du(n + 1);
    cplx s = 0.0;
    for (std::size_t a = 0; a < n; ++a) s += xi[off + a] * u[1 + a];
    du[0] = -I * s;
    for (std::size_t a = 0; a < n; ++a)
      du[1 + a] = -p.nu * q * u[1 + a] - p.nu_tilde * xi[off + a] * s -
                  I * p.kappa * q * xi[off + a] * u[0];
    return du;
  };
  auto axpy = [](const std::vector<cplx>& u, double h, const std::vector<cplx>& k) {
    std::vector<cplx> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] + h * k[i];
    return r;
  };

  std::vector<cplx> u(u0.begin(), u0.end());
  if (q == 0.0 || t == 0.0) return u;
  const auto steps = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
  const double h = t / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const auto k1 = rhs(u);
    const auto k2 = rhs(axpy(u, 0.5 * h, k1));
    const auto k3 = rhs(axpy(u, 0.5 * h, k2));
    const auto k4 = rhs(axpy(u, h, k3));
    for (std::size_t i = 0; i <= n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return u;
}

std::size_t rk4_steps(double q, double t, const PhysParams& p, double tol) {
  if (q == 0.0 || t == 0.0) return 1;
  const double rho = spectral_radius_bound(q, p);
  const double A = 0.5 * (p.nu + p.nu_tilde);
  const double ratio = std::max(1.0, std::sqrt(p.kappa) / A);
  // global error ~ t|lambda| z^4 / 120 e^{Re lambda t} <= ratio z^4 / (120 e)
  const double z = std::pow(tol * 120.0 * M_E / ratio, 0.25);
  const double guard = 0.45 / ((p.nu + p.nu_tilde + std::sqrt(p.kappa)) * q);
  const double h = std::min(z / rho, guard);
  return std::max<std::size_t>(10, static_cast<std::size_t>(std::ceil(t / h)));
}

SpectralState rk4_state(const SpectralState& u, double t, const PhysParams& p, double tol) {
  SpectralState out = SpectralState::zeros(u.grid);
  const auto n = static_cast<std::size_t>(u.dim());
  std::vector<cplx> v(n + 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 xi = u.grid.xi(i);
    v[0] = u.phi[i];
    for (std::size_t a = 0; a < n; ++a) v[1 + a] = u.m[a][i];
    const auto steps = rk4_steps(q_of(xi), t, p, tol);
    const auto r = rk4_mode(xi, v, t, t / static_cast<double>(steps), p);
    out.phi[i] = r[0];
    for (std::size_t a = 0; a < n; ++a) out.m[a][i] = r[1 + a];
  }
  return out;
}

std::array<std::array<cplx, 2>, 2> longitudinal_exp(double r, double t, const PhysParams& p) {
  const double q = r * r;
  const double A = 0.5 * (p.nu + p.nu_tilde);
  const double aq = A * q;
  const double disc = A * A - p.kappa;
  double C = 0.0, S = 0.0;  // e^{-Aqt} cosh(gt),  e^{-Aqt} sinh(gt)/g
  if (disc >= 0.0) {
    const double g = q * std::sqrt(disc);
    const double x = g * t;
    if (x < 1e-2) {
      double sh = 1.0, ch = 1.0, term_s = 1.0, term_c = 1.0;
      for (int j = 1; j < 12; ++j) {
        term_s *= x * x / ((2.0 * j) * (2.0 * j + 1.0));
        term_c *= x * x / ((2.0 * j - 1.0) * (2.0 * j));
        sh += term_s;
        ch += term_c;
      }
      const double e = std::exp(-aq * t);
      C = e * ch;
      S = e * t * sh;
    } else {
      const double slow = -p.kappa * q * q / (g + aq);  // g - Aq
      const double ep = std::exp(slow * t), em = std::exp(-(g + aq) * t);
      C = 0.5 * (ep + em);
      S = 0.5 * (ep - em) / g;
    }
  } else {
    const double w = q * std::sqrt(-disc);
    const double x = w * t;
    const double e = std::exp(-aq * t);
    C = e * std::cos(x);
    if (x < 1e-2) {
      double sn = 1.0, term = 1.0;
      for (int j = 1; j < 12; ++j) {
        term *= -x * x / ((2.0 * j) * (2.0 * j + 1.0));
        sn += term;
      }
      S = e * t * sn;
    } else {
      S = e * std::sin(x) / w;
    }
  }
  return {{{C + S * aq, -I * r * S}, {-I * p.kappa * r * q * S, C - S * aq}}};
}

double radial_linear_norm(double t, int k, const PhysParams& p, int dim, RadialProfile prof) {
  if (t < 0.0 || k < 0 || dim < 1) throw Error(ErrorKind::InvalidParams, "radial norm arguments");
  const double area = 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
  const double cn = area / std::pow(2.0 * M_PI, dim);
  const double scale = 1.0 / std::sqrt(1.0 + t);

  auto integrand = [&](double eta) -> double {
    const double r = eta * scale;
    const double g = prof.amplitude * std::exp(-0.5 * r * r);
    if (g == 0.0) return 0.0;
    const cplx phi0 = g;
    const cplx mu0 = prof.derivative_form ? I * r * g : cplx{};
    const auto E = longitudinal_exp(r, t, p);
    const cplx phi = E[0][0] * phi0 + E[0][1] * mu0;
    const cplx mu = E[1][0] * phi0 + E[1][1] * mu0;
    return std::pow(r, 2 * k + dim - 1) * (std::norm(phi) + std::norm(mu)) * scale;
  };

  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0, l1 = 0.0;
  const double val = integrator.integrate(integrand, 1e-10, &err, &l1);
  if (!std::isfinite(val) || err > 1e-8 * std::abs(val))
    throw Error(ErrorKind::QuadratureFailure, "radial integral missed its tolerance");
  return std::sqrt(cn * val);
}

std::vector<double> pressure_taylor(const PressureModel& p, int order) {
  std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
  switch (p.kind) {
    case PressureModel::Kind::critical_quadratic:
      if (order >= 2) c[2] = p.c;
      break;
    case PressureModel::Kind::van_der_waals: {
      // theta rho/(1 - b rho) around rho = 1 with beta = b/(1-b)
      const double beta = p.b / (1.0 - p.b);
      const double lead = p.theta / (1.0 - p.b);
      c[0] = lead - p.a;
      double bk = 1.0;
      for (int k = 1; k <= order; ++k) {
        c[static_cast<std::size_t>(k)] = lead * bk * (beta + 1.0);
        bk *= beta;
      }
      if (order >= 1) c[1] -= 2.0 * p.a;
      if (order >= 2) c[2] -= p.a;
      break;
    }
    case PressureModel::Kind::custom:
      for (std::size_t k = 0; k < c.size() && k < p.coefficients.size(); ++k) c[k] = p.coefficients[k];
      break;
  }
  return c;
}

namespace {

class Convolver {
 public:
  explicit Convolver(const Grid& g) : grid_(g) {
    for (std::size_t i = 0; i < g.size(); ++i) k_.push_back(g.index_to_k(i));
  }

  ComplexField operator()(const ComplexField& f, const ComplexField& g) const {
    const std::size_t n = grid_.size();
    ComplexField out(n, 0.0);
    const double w = grid_.parseval_weight();
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (f[j] == cplx{}) continue;
        const auto& a = k_[k];
        const auto& b = k_[j];
        acc += f[j] * g[grid_.k_to_index({a[0] - b[0], a[1] - b[1], a[2] - b[2]})];
      }
      out[k] = w * acc;
    }
    return out;
  }

  ComplexField identity() const {
    ComplexField e(grid_.size(), 0.0);
    e[0] = 1.0 / grid_.parseval_weight();
    return e;
  }

 private:
  Grid grid_;
  std::vector<std::array<int, 3>> k_;
};

double sup_physical(const Grid& g, const ComplexField& f) {
  // direct inverse sum at every grid point
  const double w = g.parseval_weight();
  const auto& e = g.extents();
  double sup = 0.0;
  std::vector<Vec3> xi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) xi[i] = g.xi(i);
  for (int p0 = 0; p0 < e[0]; ++p0)
    for (int p1 = 0; p1 < e[1]; ++p1)
      for (int p2 = 0; p2 < e[2]; ++p2) {
        const Vec3 x{p0 * g.dx(), p1 * g.dx(), p2 * g.dx()};
        cplx acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
          acc += f[i] * std::exp(I * (xi[i][0] * x[0] + xi[i][1] * x[1] + xi[i][2] * x[2]));
        sup = std::max(sup, std::abs(w * acc));
      }
  return sup;
}

}  // namespace

SpectralState direct_nonlinearity(const SpectralState& u, const PhysParams& p) {
  const Grid& g = u.grid;
  if (g.modes() > 8) throw Error(ErrorKind::InvalidGrid, "direct convolution limited to 8 per axis");
  const auto n = static_cast<std::size_t>(g.dim());
  const std::size_t off = 3 - n;
  const std::size_t N = g.size();

  auto trunc = [&](ComplexField f) {
    for (std::size_t i = 0; i < N; ++i)
      if (!g.is_dealiased(i)) f[i] = 0.0;
    return f;
  };
  const ComplexField phi = trunc(u.phi);
  std::vector<ComplexField> m;
  for (const auto& c : u.m) m.push_back(trunc(c));
  if (sup_physical(g, phi) > 0.1)
    throw Error(ErrorKind::AmplitudeTooLarge, "direct oracle needs sup|phi| <= 0.1");

  const Convolver conv(g);
  constexpr int kTerms = 18;

  // powers of phi and the reciprocal density 1/(1+phi)
  std::vector<ComplexField> pw{conv.identity(), phi};
  for (int j = 2; j <= kTerms; ++j) pw.push_back(conv(pw.back(), phi));
  ComplexField recip(N, 0.0);
  for (int j = 0; j <= kTerms; ++j) {
    const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < N; ++i) recip[i] += sgn * pw[static_cast<std::size_t>(j)][i];
  }
  const auto coeffs = pressure_taylor(p.pressure, kTerms);
  ComplexField pres(N, 0.0);
  for (int j = 2; j <= kTerms; ++j)
    for (std::size_t i = 0; i < N; ++i)
      pres[i] += coeffs[static_cast<std::size_t>(j)] * pw[static_cast<std::size_t>(j)][i];

  std::vector<Vec3> xi(N);
  std::vector<double> q(N);
  for (std::size_t i = 0; i < N; ++i) {
    xi[i] = g.xi(i);
    q[i] = q_of(xi[i]);
  }

  SpectralState F = SpectralState::zeros(g);
  const auto r_phi = conv(recip, phi);
  std::vector<ComplexField> rm(n), w(n);
  for (std::size_t a = 0; a < n; ++a) {
    rm[a] = conv(recip, m[a]);
    w[a] = conv(r_phi, m[a]);
    for (auto& v : w[a]) v = -v;
  }
  for (std::size_t a = 0; a < n; ++a) {
    // kappa phi grad_a Lap phi
    ComplexField d3(N);
    for (std::size_t i = 0; i < N; ++i) d3[i] = I * xi[i][off + a] * (-q[i]) * phi[i];
    const auto kort = conv(phi, d3);
    for (std::size_t i = 0; i < N; ++i) F.m[a][i] = p.kappa * kort[i] - I * xi[i][off + a] * pres[i];
    for (std::size_t b = 0; b < n; ++b) {
      const auto T = conv(rm[a], m[b]);
      for (std::size_t i = 0; i < N; ++i) F.m[a][i] -= I * xi[i][off + b] * T[i];
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    cplx div = 0.0;
    for (std::size_t b = 0; b < n; ++b) div += xi[i][off + b] * w[b][i];
    for (std::size_t a = 0; a < n; ++a)
      F.m[a][i] += -p.nu * q[i] * w[a][i] - p.nu_tilde * xi[i][off + a] * div;
  }
  for (auto& c : F.m) c = trunc(c);
  return F;
}

}  // namespace nsk::oracle
