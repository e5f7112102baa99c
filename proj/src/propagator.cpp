#include "nsk/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "nsk/error.hpp"

namespace nsk {

namespace {
constexpr cplx I{0.0, 1.0};
constexpr int kTaylorTerms = 24;
}  // namespace

EigenPair eigenvalues(double xi_sq, const PhysParams& params) {
  const double A = params.A();
  const double K = params.K();
  const double disc = 1.0 - K * K;
  Regime regime = Regime::critical;
  if (disc > 1e-14) regime = Regime::overdamped;
  if (disc < -1e-14) regime = Regime::oscillatory;

  if (xi_sq == 0.0) return {0.0, 0.0, regime};
  const double aq = A * xi_sq;
  if (disc >= 0.0) {
    // 1 - sqrt(1-K^2) written as K^2 / (1 + sqrt(1-K^2)) to keep the slow root accurate
    const double root = std::sqrt(disc);
    return {-aq * (1.0 + root), -aq * K * K / (1.0 + root), regime};
  }
  const double w = std::sqrt(-disc);
  return {cplx(-aq, -aq * w), cplx(-aq, aq * w), regime};
}

cplx phi1(cplx z) {
  if (std::abs(z) < 1e-3) {
    cplx sum = 1.0, term = 1.0;
    for (int k = 2; k < 20; ++k) {
      term *= z / static_cast<double>(k);
      sum += term;
      if (std::abs(term) < 1e-17) break;
    }
    return sum;
  }
  const double x = z.real(), y = z.imag();
  const double s = std::sin(0.5 * y);
  const cplx em1(std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y));
  return em1 / z;
}

namespace {

cplx taylor_divided_difference(std::span<const cplx> z) {
  const std::size_t m = z.size() - 1;
  cplx c = 0.0;
  for (auto v : z) c += v;
  c /= static_cast<double>(z.size());

  std::array<cplx, kTaylorTerms> h{};
  h[0] = 1.0;
  for (auto v : z) {
    const cplx w = v - c;
    for (int k = 1; k < kTaylorTerms; ++k) h[k] += w * h[k - 1];
  }
  double inv_fact = 1.0;
  for (std::size_t j = 2; j <= m; ++j) inv_fact /= static_cast<double>(j);
  cplx sum = 0.0;
  for (int k = 0; k < kTaylorTerms; ++k) {
    sum += h[k] * inv_fact;
    inv_fact /= static_cast<double>(static_cast<std::size_t>(k + 1) + m);
  }
  return std::exp(c) * sum;
}

}  // namespace

cplx exp_divided_difference(std::span<const cplx> z) {
  if (z.empty()) throw Error(ErrorKind::InvalidParams, "divided difference needs a node");
  if (z.size() == 1) return std::exp(z[0]);
  if (z.size() == 2) {
    // anchor on the node with the larger real part so phi1 sees Re <= 0
    const bool swap = z[0].real() > z[1].real();
    const cplx hi = swap ? z[0] : z[1];
    const cplx lo = swap ? z[1] : z[0];
    return std::exp(hi) * phi1(lo - hi);
  }

  std::size_t bi = 0, bj = 1;
  double spread = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j)
      if (double d = std::abs(z[i] - z[j]); d > spread) {
        spread = d;
        bi = i;
        bj = j;
      }
  if (spread < 1.0) return taylor_divided_difference(z);

  std::vector<cplx> without_i, without_j;
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k != bi) without_i.push_back(z[k]);
    if (k != bj) without_j.push_back(z[k]);
  }
  return (exp_divided_difference(without_j) - exp_divided_difference(without_i)) /
         (z[bi] - z[bj]);
}

cplx divided_difference(cplx lp, cplx lm, double t) {
  const std::array<cplx, 2> nodes{lp * t, lm * t};
  return t * exp_divided_difference(nodes);
}

namespace {

// f(z) and f[z1, z2] for f = exp[., 0, ..., 0] with `zeros` trailing zeros.
cplx f_value(cplx z, int zeros) {
  std::array<cplx, 3> nodes{z, 0.0, 0.0};
  return exp_divided_difference(std::span<const cplx>(nodes.data(), 1 + zeros));
}

cplx f_divided(cplx z1, cplx z2, int zeros) {
  std::array<cplx, 4> nodes{z1, z2, 0.0, 0.0};
  return exp_divided_difference(std::span<const cplx>(nodes.data(), 2 + zeros));
}

int trailing_zeros(MatrixFunction f) {
  switch (f) {
    case MatrixFunction::exp: return 0;
    case MatrixFunction::phi1: return 1;
    case MatrixFunction::phi2: return 2;
  }
  return 0;
}

}  // namespace

ModeCoefficients mode_coefficients(double xi_sq, double h, const PhysParams& params,
                                   MatrixFunction f) {
  const int zeros = trailing_zeros(f);
  ModeCoefficients c;
  if (xi_sq == 0.0) {
    const double f0 = f_value(0.0, zeros).real();
    c.a = c.d = c.e = f0;
    c.b = 0.0;
    return c;
  }
  const auto ev = eigenvalues(xi_sq, params);
  const cplx mp = ev.lambda_plus * h, mm = ev.lambda_minus * h;
  const cplx dd = f_divided(mp, mm, zeros);
  const cplx fm = f_value(mm, zeros);
  c.a = (fm - mm * dd).real();
  c.d = (fm + mp * dd).real();
  c.b = h * dd.real();
  c.e = f_value(-params.nu * xi_sq * h, zeros).real();
  return c;
}

ModePropagator mode_propagator(const Vec3& xi_in, int dim, double t, const PhysParams& params,
                               MatrixFunction f) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidParams, "dimension must be 1, 2 or 3");
  // only the last dim components belong to the mode
  Vec3 xi{};
  for (int a = 3 - dim; a < 3; ++a) xi[static_cast<std::size_t>(a)] = xi_in[static_cast<std::size_t>(a)];
  const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  const auto c = mode_coefficients(q, t, params, f);
  ModePropagator p;
  p.dim = dim;
  p.xi = xi;
  p.s11 = c.a;
  p.s22_transverse = c.e;
  p.s22_longitudinal = q > 0.0 ? c.d - c.e : 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    p.s12[j] = -I * c.b * xi[j];
    p.s21[j] = -I * params.kappa * q * c.b * xi[j];
  }
  return p;
}

std::vector<cplx> ModePropagator::dense() const {
  const auto n = static_cast<std::size_t>(dim) + 1;
  const std::size_t off = 3 - static_cast<std::size_t>(dim);
  const double q = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  std::vector<cplx> S(n * n, 0.0);
  S[0] = s11;
  for (std::size_t i = 1; i < n; ++i) {
    S[i] = s12[off + i - 1];
    S[i * n] = s21[off + i - 1];
    for (std::size_t j = 1; j < n; ++j) {
      cplx v = (i == j) ? s22_transverse : cplx{};
      if (q > 0.0) v += s22_longitudinal * xi[off + i - 1] * xi[off + j - 1] / q;
      S[i * n + j] = v;
    }
  }
  return S;
}

std::vector<cplx> ModePropagator::apply(std::span<const cplx> x) const {
  const auto S = dense();
  const std::size_t n = x.size();
  if (n * n != S.size()) throw Error(ErrorKind::ShapeMismatch, "vector length vs propagator");
  std::vector<cplx> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += S[i * n + j] * x[j];
  return y;
}

PropagatorTable make_table(const Grid& grid, double h, const PhysParams& params,
                           MatrixFunction f) {
  PropagatorTable t;
  t.grid = grid;
  t.h = h;
  t.function = f;
  t.kappa = params.kappa;
  t.coeffs.resize(grid.size());
  // coefficients depend on |xi|^2 only; many modes share a shell
  std::vector<std::pair<double, std::size_t>> shells;
  shells.reserve(grid.size());
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) { shells.emplace_back(q, i); });
  std::sort(shells.begin(), shells.end());
  double last_q = -1.0;
  ModeCoefficients last{};
  for (const auto& [q, i] : shells) {
    if (q != last_q) {
      last = mode_coefficients(q, h, params, f);
      last_q = q;
    }
    t.coeffs[i] = grid.is_nyquist(i) ? ModeCoefficients{0.0, 0.0, 0.0, 0.0} : last;
  }
  return t;
}

namespace {

template <bool Accumulate>
void table_kernel(const PropagatorTable& table, const SpectralState& u, SpectralState& out,
                  double scale, double kappa) {
  const auto nd = static_cast<std::size_t>(u.dim());
  const std::size_t off = 3 - nd;
  for_each_mode(u.grid, [&](std::size_t i, const Vec3& xi, double q) {
    const auto& c = table.coeffs[i];
    const cplx phi = u.phi[i];
    cplx s = 0.0;
    for (std::size_t j = 0; j < nd; ++j) s += xi[off + j] * u.m[j][i];
    const cplx phi_new = c.a * phi - I * c.b * s;
    const cplx lon = q > 0.0 ? -I * c.b * kappa * q * phi + (c.d - c.e) * s / q : cplx{};
    if constexpr (Accumulate) {
      out.phi[i] += scale * phi_new;
      for (std::size_t j = 0; j < nd; ++j)
        out.m[j][i] += scale * (c.e * u.m[j][i] + xi[off + j] * lon);
    } else {
      out.phi[i] = scale * phi_new;
      for (std::size_t j = 0; j < nd; ++j)
        out.m[j][i] = scale * (c.e * u.m[j][i] + xi[off + j] * lon);
    }
  });
}

}  // namespace

void apply_table(const PropagatorTable& table, const SpectralState& u, SpectralState& out,
                 double scale) {
  if (!(table.grid == u.grid)) throw Error(ErrorKind::ShapeMismatch, "table grid vs state grid");
  if (!(out.grid == u.grid)) out = SpectralState::zeros(u.grid);
  table_kernel<false>(table, u, out, scale, table.kappa);
}

void accumulate_table(const PropagatorTable& table, const SpectralState& u, SpectralState& out,
                      double scale) {
  if (!(table.grid == u.grid) || !(out.grid == u.grid))
    throw Error(ErrorKind::ShapeMismatch, "table grid vs state grid");
  table_kernel<true>(table, u, out, scale, table.kappa);
}

SpectralState apply_semigroup(const SpectralState& state, double t, const PhysParams& params) {
  if (t < 0.0) throw Error(ErrorKind::InvalidParams, "negative propagation time");
  const auto table = make_table(state.grid, t, params);
  SpectralState out = SpectralState::zeros(state.grid);
  apply_table(table, state, out);
  return out;
}

}  // namespace nsk
