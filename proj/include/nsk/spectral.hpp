#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nsk {

using cplx = std::complex<double>;
using ComplexField = std::vector<cplx>;
using RealField = std::vector<double>;
using Vec3 = std::array<double, 3>;

// ---------------------------------------------------------------------------
// Grid
//
// Periodic box [0, L)^n sampled with N points per axis. Mode storage follows
// the FFT ordering on every axis (0, 1, ..., N/2-1, -N/2, ..., -1), row-major
// with the last axis fastest. Unused axes (n < 3) have extent 1, so a flat
// index always decomposes into three axis indices.
//
// The frequency of axis index k is (2*pi/L) * k. The Nyquist plane k = -N/2
// is its own conjugate partner but not its own negative; it is not a retained
// mode of a SpectralState (see is_nyquist).
// ---------------------------------------------------------------------------
class Grid {
 public:
  Grid() = default;

  int dim() const noexcept { return dim_; }
  int modes() const noexcept { return modes_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / modes_; }
  double k0() const noexcept { return k0_; }
  std::size_t size() const noexcept { return size_; }
  const std::array<int, 3>& extents() const noexcept { return extents_; }

  /// dx^n, the quadrature weight of one physical sample.
  double cell_volume() const noexcept;
  /// 1/L^n: sum_x |f|^2 dx^n = parseval_weight() * sum_k |f_hat|^2.
  double parseval_weight() const noexcept;

  /// Signed integer wavenumber of axis position i in [0, N).
  int wavenumber(int i) const noexcept { return i < modes_ / 2 ? i : i - modes_; }
  std::array<int, 3> index_to_k(std::size_t flat) const noexcept;
  /// Inverse of index_to_k; components are reduced mod N.
  std::size_t k_to_index(const std::array<int, 3>& k) const noexcept;
  std::size_t conjugate_index(std::size_t flat) const noexcept;

  Vec3 xi(std::size_t flat) const noexcept;
  double xi_sq(std::size_t flat) const noexcept;
  /// Frequency of axis position i (identical for every axis).
  double axis_frequency(int i) const noexcept { return k0_ * wavenumber(i); }

  bool is_nyquist(std::size_t flat) const noexcept;
  /// Two-thirds rule: keep iff 3|k_i| < N on every axis.
  bool is_dealiased(std::size_t flat) const noexcept;
  /// Largest |xi| that is representable without touching Nyquist.
  double max_frequency() const noexcept { return 3.141592653589793238 * modes_ / length_; }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.dim_ == b.dim_ && a.modes_ == b.modes_ && a.length_ == b.length_;
  }

 private:
  friend Grid make_grid(int dim, int modes, double length);

  int dim_ = 0;
  int modes_ = 0;
  double length_ = 0.0;
  double k0_ = 0.0;
  std::size_t size_ = 0;
  std::array<int, 3> extents_{1, 1, 1};
};

/// Throws Error(InvalidGrid) unless dim in {1,2,3}, modes even and >= 8,
/// length > 0.
Grid make_grid(int dim, int modes, double length);

/// Calls fn(flat, xi, |xi|^2) for every mode in storage order.
template <class Fn>
void for_each_mode(const Grid& grid, Fn&& fn) {
  const auto& e = grid.extents();
  std::size_t flat = 0;
  for (int i0 = 0; i0 < e[0]; ++i0) {
    const double x0 = e[0] > 1 ? grid.axis_frequency(i0) : 0.0;
    for (int i1 = 0; i1 < e[1]; ++i1) {
      const double x1 = e[1] > 1 ? grid.axis_frequency(i1) : 0.0;
      for (int i2 = 0; i2 < e[2]; ++i2, ++flat) {
        const double x2 = e[2] > 1 ? grid.axis_frequency(i2) : 0.0;
        const Vec3 xi{x0, x1, x2};
        fn(flat, xi, x0 * x0 + x1 * x1 + x2 * x2);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// SpectralState: (phi_hat, m_hat) on the retained modes of a grid.
// phi = rho - 1, m = momentum. m holds dim() components.
// ---------------------------------------------------------------------------
struct SpectralState {
  Grid grid;
  ComplexField phi;
  std::vector<ComplexField> m;

  static SpectralState zeros(const Grid& grid);

  int dim() const noexcept { return grid.dim(); }
  std::size_t size() const noexcept { return grid.size(); }

  SpectralState& operator+=(const SpectralState& other);
  SpectralState& operator-=(const SpectralState& other);
  SpectralState& operator*=(double s);
  /// this += s * other
  SpectralState& axpy(double s, const SpectralState& other);
};

SpectralState operator+(SpectralState a, const SpectralState& b);
SpectralState operator-(SpectralState a, const SpectralState& b);
SpectralState operator*(double s, SpectralState a);

/// Throws ShapeMismatch if the grids or field sizes differ.
void require_same_shape(const SpectralState& a, const SpectralState& b);

/// Zeroes the non-retained (Nyquist) modes in place.
void drop_nyquist(const Grid& grid, ComplexField& field);
void drop_nyquist(SpectralState& state);
/// Zeroes every mode outside the two-thirds band in place.
void dealias(const Grid& grid, ComplexField& field);
void dealias(SpectralState& state);

/// max_k |f(-k) - conj f(k)| / max_k |f(k)|; 0 for the zero field.
double hermitian_asymmetry(const Grid& grid, std::span<const cplx> field);
double hermitian_asymmetry(const SpectralState& state);
/// Replaces f by (f(k) + conj f(-k)) / 2.
void symmetrize(const Grid& grid, ComplexField& field);

// ---------------------------------------------------------------------------
// Transforms. to_spectral carries the dx^n factor so that the coefficients
// approximate the continuum transform  f_hat(xi) = int f(x) e^{-i x.xi} dx.
// ---------------------------------------------------------------------------
ComplexField to_spectral(const Grid& grid, std::span<const double> field);
ComplexField to_spectral(const Grid& grid, std::span<const cplx> field);
/// Real part of the inverse transform.
RealField from_spectral(const Grid& grid, std::span<const cplx> coeffs);
ComplexField from_spectral_complex(const Grid& grid, std::span<const cplx> coeffs);

/// Builds a state from physical samples (phi, m_1..m_n); Nyquist modes dropped.
SpectralState state_from_physical(const Grid& grid, std::span<const double> phi,
                                  const std::vector<RealField>& m);

enum class Component { phi, m, both };

/// Discrete L^2 norm of the order-k gradient: (sum |xi|^{2k} |u_hat|^2 w)^{1/2}.
double seminorm(const SpectralState& state, int k, Component which = Component::both);
/// Same quantity for a single scalar field.
double seminorm(const Grid& grid, std::span<const cplx> field, int k);
/// Sobolev norm with weights sum_{j<=k} |xi|^{2j}; orders may differ per component.
double sobolev_norm(const SpectralState& state, int k_phi, int k_m);

/// Pairwise (cascade) summation; the order of reduction is fixed by the size.
double pairwise_sum(std::span<const double> values);

/// Hermitian-symmetric random state with Gaussian amplitude envelope
/// exp(-|xi|^2 / (2 width^2)); zero at xi = 0 unless keep_mean.
SpectralState random_state(const Grid& grid, std::uint64_t seed, double amplitude,
                           double width, bool keep_mean = false);

}  // namespace nsk
