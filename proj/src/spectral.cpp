#include "nsk/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <tuple>

#include "nsk/error.hpp"

namespace nsk {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidCutoff: return "InvalidCutoff";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::VacuumApproach: return "VacuumApproach";
    case ErrorKind::DensityWindow: return "DensityWindow";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorKind::Blowup: return "Blowup";
    case ErrorKind::StabilityGuard: return "StabilityGuard";
    case ErrorKind::InsufficientWindow: return "InsufficientWindow";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Grid make_grid(int dim, int modes, double length) {
  if (dim < 1 || dim > 3) throw Error(ErrorKind::InvalidGrid, "dimension must be 1, 2 or 3");
  if (modes < 8 || modes % 2 != 0)
    throw Error(ErrorKind::InvalidGrid, "modes per axis must be even and >= 8");
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorKind::InvalidGrid, "box length must be positive");
  Grid g;
  g.dim_ = dim;
  g.modes_ = modes;
  g.length_ = length;
  g.k0_ = 2.0 * M_PI / length;
  g.extents_ = {1, 1, 1};
  for (int a = 0; a < dim; ++a) g.extents_[static_cast<std::size_t>(3 - dim + a)] = modes;
  g.size_ = 1;
  for (int e : g.extents_) g.size_ *= static_cast<std::size_t>(e);
  return g;
}

double Grid::cell_volume() const noexcept { return std::pow(dx(), dim_); }
double Grid::parseval_weight() const noexcept { return std::pow(length_, -dim_); }

std::array<int, 3> Grid::index_to_k(std::size_t flat) const noexcept {
  const auto e1 = static_cast<std::size_t>(extents_[1]);
  const auto e2 = static_cast<std::size_t>(extents_[2]);
  const int i2 = static_cast<int>(flat % e2);
  const int i1 = static_cast<int>((flat / e2) % e1);
  const int i0 = static_cast<int>(flat / (e1 * e2));
  auto wn = [&](int i, int extent) { return extent > 1 ? wavenumber(i) : 0; };
  return {wn(i0, extents_[0]), wn(i1, extents_[1]), wn(i2, extents_[2])};
}

std::size_t Grid::k_to_index(const std::array<int, 3>& k) const noexcept {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    const int e = extents_[a];
    const int i = ((k[a] % e) + e) % e;
    flat = flat * static_cast<std::size_t>(e) + static_cast<std::size_t>(i);
  }
  return flat;
}

std::size_t Grid::conjugate_index(std::size_t flat) const noexcept {
  auto k = index_to_k(flat);
  return k_to_index({-k[0], -k[1], -k[2]});
}

Vec3 Grid::xi(std::size_t flat) const noexcept {
  const auto k = index_to_k(flat);
  return {k0_ * k[0], k0_ * k[1], k0_ * k[2]};
}

double Grid::xi_sq(std::size_t flat) const noexcept {
  const auto x = xi(flat);
  return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
}

bool Grid::is_nyquist(std::size_t flat) const noexcept {
  const auto k = index_to_k(flat);
  for (std::size_t a = 0; a < 3; ++a)
    if (extents_[a] > 1 && k[a] == -modes_ / 2) return true;
  return false;
}

bool Grid::is_dealiased(std::size_t flat) const noexcept {
  const auto k = index_to_k(flat);
  for (int c : k)
    if (3 * std::abs(c) >= modes_) return false;
  return true;
}

// ---------------------------------------------------------------------------
// FFT plans, cached per thread and grid shape. Plans are created in-place and
// unaligned so they can execute on any buffer of the right size.
// ---------------------------------------------------------------------------

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const Grid& grid, int sign) {
    const auto key = std::make_tuple(grid.dim(), grid.modes(), sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> dims(static_cast<std::size_t>(grid.dim()), grid.modes());
    auto* buf = fftw_alloc_complex(grid.size());
    fftw_plan plan = fftw_plan_dft(grid.dim(), dims.data(), buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  thread_local PlanCache cache;
  return cache;
}

void execute_inplace(const Grid& grid, ComplexField& data, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan_cache().get(grid, sign), ptr, ptr);
}

void require_size(const Grid& grid, std::size_t n) {
  if (n != grid.size())
    throw Error(ErrorKind::ShapeMismatch, "field has " + std::to_string(n) +
                                              " samples, grid expects " +
                                              std::to_string(grid.size()));
}

}  // namespace

ComplexField to_spectral(const Grid& grid, std::span<const double> field) {
  require_size(grid, field.size());
  ComplexField out(field.begin(), field.end());
  execute_inplace(grid, out, FFTW_FORWARD);
  const double w = grid.cell_volume();
  for (auto& c : out) c *= w;
  return out;
}

ComplexField to_spectral(const Grid& grid, std::span<const cplx> field) {
  require_size(grid, field.size());
  ComplexField out(field.begin(), field.end());
  execute_inplace(grid, out, FFTW_FORWARD);
  const double w = grid.cell_volume();
  for (auto& c : out) c *= w;
  return out;
}

ComplexField from_spectral_complex(const Grid& grid, std::span<const cplx> coeffs) {
  require_size(grid, coeffs.size());
  ComplexField out(coeffs.begin(), coeffs.end());
  execute_inplace(grid, out, FFTW_BACKWARD);
  const double w = grid.parseval_weight();
  for (auto& c : out) c *= w;
  return out;
}

RealField from_spectral(const Grid& grid, std::span<const cplx> coeffs) {
  const auto c = from_spectral_complex(grid, coeffs);
  RealField out(c.size());
  std::transform(c.begin(), c.end(), out.begin(), [](cplx z) { return z.real(); });
  return out;
}

// ---------------------------------------------------------------------------
// SpectralState
// ---------------------------------------------------------------------------

SpectralState SpectralState::zeros(const Grid& grid) {
  SpectralState s;
  s.grid = grid;
  s.phi.assign(grid.size(), cplx{});
  s.m.assign(static_cast<std::size_t>(grid.dim()), ComplexField(grid.size(), cplx{}));
  return s;
}

void require_same_shape(const SpectralState& a, const SpectralState& b) {
  if (!(a.grid == b.grid) || a.phi.size() != b.phi.size() || a.m.size() != b.m.size())
    throw Error(ErrorKind::ShapeMismatch, "spectral states live on different grids");
}

namespace {
template <class Op>
void zip_apply(SpectralState& a, const SpectralState& b, Op op) {
  require_same_shape(a, b);
  for (std::size_t i = 0; i < a.phi.size(); ++i) op(a.phi[i], b.phi[i]);
  for (std::size_t c = 0; c < a.m.size(); ++c)
    for (std::size_t i = 0; i < a.m[c].size(); ++i) op(a.m[c][i], b.m[c][i]);
}
}  // namespace

SpectralState& SpectralState::operator+=(const SpectralState& other) {
  zip_apply(*this, other, [](cplx& x, cplx y) { x += y; });
  return *this;
}

SpectralState& SpectralState::operator-=(const SpectralState& other) {
  zip_apply(*this, other, [](cplx& x, cplx y) { x -= y; });
  return *this;
}

SpectralState& SpectralState::operator*=(double s) {
  for (auto& x : phi) x *= s;
  for (auto& comp : m)
    for (auto& x : comp) x *= s;
  return *this;
}

SpectralState& SpectralState::axpy(double s, const SpectralState& other) {
  zip_apply(*this, other, [s](cplx& x, cplx y) { x += s * y; });
  return *this;
}

SpectralState operator+(SpectralState a, const SpectralState& b) { return a += b; }
SpectralState operator-(SpectralState a, const SpectralState& b) { return a -= b; }
SpectralState operator*(double s, SpectralState a) { return a *= s; }

void drop_nyquist(const Grid& grid, ComplexField& field) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (grid.is_nyquist(i)) field[i] = 0.0;
}

void drop_nyquist(SpectralState& state) {
  drop_nyquist(state.grid, state.phi);
  for (auto& c : state.m) drop_nyquist(state.grid, c);
}

void dealias(const Grid& grid, ComplexField& field) {
  for (std::size_t i = 0; i < field.size(); ++i)
    if (!grid.is_dealiased(i)) field[i] = 0.0;
}

void dealias(SpectralState& state) {
  dealias(state.grid, state.phi);
  for (auto& c : state.m) dealias(state.grid, c);
}

double hermitian_asymmetry(const Grid& grid, std::span<const cplx> field) {
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    scale = std::max(scale, std::abs(field[i]));
    worst = std::max(worst, std::abs(field[grid.conjugate_index(i)] - std::conj(field[i])));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double hermitian_asymmetry(const SpectralState& state) {
  double worst = hermitian_asymmetry(state.grid, state.phi);
  for (const auto& c : state.m) worst = std::max(worst, hermitian_asymmetry(state.grid, c));
  return worst;
}

void symmetrize(const Grid& grid, ComplexField& field) {
  for (std::size_t i = 0; i < field.size(); ++i) {
    const std::size_t j = grid.conjugate_index(i);
    if (j < i) continue;
    const cplx avg = 0.5 * (field[i] + std::conj(field[j]));
    field[i] = avg;
    field[j] = std::conj(avg);
  }
}

SpectralState state_from_physical(const Grid& grid, std::span<const double> phi,
                                  const std::vector<RealField>& m) {
  if (m.size() != static_cast<std::size_t>(grid.dim()))
    throw Error(ErrorKind::ShapeMismatch, "momentum needs one component per dimension");
  SpectralState s;
  s.grid = grid;
  s.phi = to_spectral(grid, phi);
  for (const auto& comp : m) s.m.push_back(to_spectral(grid, std::span<const double>(comp)));
  drop_nyquist(s);
  return s;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {
double weighted_energy(const Grid& grid, std::span<const cplx> field, int k) {
  std::vector<double> terms(field.size());
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) {
    terms[i] = std::pow(q, k) * std::norm(field[i]);
  });
  return grid.parseval_weight() * pairwise_sum(terms);
}

double sobolev_energy(const Grid& grid, std::span<const cplx> field, int order) {
  std::vector<double> terms(field.size());
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) {
    double w = 0.0, qj = 1.0;
    for (int j = 0; j <= order; ++j, qj *= q) w += qj;
    terms[i] = w * std::norm(field[i]);
  });
  return grid.parseval_weight() * pairwise_sum(terms);
}
}  // namespace

double seminorm(const Grid& grid, std::span<const cplx> field, int k) {
  return std::sqrt(weighted_energy(grid, field, k));
}

double seminorm(const SpectralState& state, int k, Component which) {
  double e = 0.0;
  if (which != Component::m) e += weighted_energy(state.grid, state.phi, k);
  if (which != Component::phi)
    for (const auto& c : state.m) e += weighted_energy(state.grid, c, k);
  return std::sqrt(e);
}

double sobolev_norm(const SpectralState& state, int k_phi, int k_m) {
  double e = sobolev_energy(state.grid, state.phi, k_phi);
  for (const auto& c : state.m) e += sobolev_energy(state.grid, c, k_m);
  return std::sqrt(e);
}

SpectralState random_state(const Grid& grid, std::uint64_t seed, double amplitude,
                           double width, bool keep_mean) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto state = SpectralState::zeros(grid);

  std::vector<double> envelope(grid.size(), 0.0);
  for_each_mode(grid, [&](std::size_t i, const Vec3&, double q) {
    if (!grid.is_nyquist(i)) envelope[i] = std::exp(-q / (2.0 * width * width));
  });
  if (!keep_mean) envelope[0] = 0.0;
  double total = 0.0;
  for (double e : envelope) total += e * e;
  const double sigma =
      total > 0.0 ? amplitude / (grid.parseval_weight() * std::sqrt(total)) : 0.0;

  auto fill = [&](ComplexField& f) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const std::size_t j = grid.conjugate_index(i);
      if (j < i) continue;
      if (j == i) {
        f[i] = sigma * envelope[i] * normal(rng);
      } else {
        const cplx c(normal(rng), normal(rng));
        f[i] = sigma * envelope[i] * c / std::sqrt(2.0);
        f[j] = std::conj(f[i]);
      }
    }
  };
  fill(state.phi);
  for (auto& c : state.m) fill(c);
  return state;
}

}  // namespace nsk
