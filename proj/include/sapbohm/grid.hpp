#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace sapbohm {

using cplx = std::complex<double>;
using RealField = std::vector<double>;
using ComplexField = std::vector<cplx>;

// Uniform periodic grid x_i = x_min + i dx, i in [0, n), dx = (x_max - x_min)/n,
// together with its FFT wavenumbers in standard ordering
// (0, 1, ..., n/2-1, -n/2, ..., -1) * 2 pi / (n dx).
class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_points);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }

  double x(std::size_t i) const noexcept { return x_[i]; }
  const RealField& points() const noexcept { return x_; }
  const RealField& wavenumbers() const noexcept { return k_; }

  // Largest i with x_i <= x, clamped to [0, n-1].
  std::size_t floor_index(double x) const noexcept;
  bool contains(double x) const noexcept { return x >= x_min_ && x <= x_[n_ - 1]; }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
  RealField x_;
  RealField k_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(double x_min, double x_max, std::size_t n_points);

// Complex field on a grid at one time instant.
struct Wavefunction {
  GridPtr grid;
  ComplexField values;
  double time = 0.0;

  Wavefunction() = default;
  Wavefunction(GridPtr g, ComplexField v, double t = 0.0)
      : grid(std::move(g)), values(std::move(v)), time(t) {}
  explicit Wavefunction(GridPtr g) : grid(std::move(g)), values(grid->size()) {}

  std::size_t size() const noexcept { return values.size(); }
};

struct Populations {
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
  double total() const noexcept { return left + middle + right; }
};

// Sample of a velocity field with its validity mask; points whose density is
// at or below the floor carry valid = false and an unspecified velocity.
struct VelocityField {
  RealField velocity;
  std::vector<bool> valid;
};

inline constexpr double kDefaultDensityFloor = 1e-12;

// Quadrature over the grid: dx * sum(f_i).
double integrate(std::span<const double> f, double dx) noexcept;

double norm(const Wavefunction& psi);
void normalize(Wavefunction& psi);

RealField density(const Wavefunction& psi);
// Spectral first derivative of psi.
ComplexField gradient(const Wavefunction& psi);
// Spectral second derivative of psi.
ComplexField laplacian(const Wavefunction& psi);
// J = Im(psi^* d_x psi), derivative computed spectrally.
RealField current(const Wavefunction& psi);
VelocityField velocity_field(const Wavefunction& psi,
                             double density_floor = kDefaultDensityFloor);

// Populations over (-inf, -x0), [-x0, x0], (x0, inf); each grid point belongs
// to exactly one region so the three values sum to the norm.
Populations populations(const Wavefunction& psi, double x0);
double mean_position(const Wavefunction& psi);
// d<x>/dt via the Ehrenfest identity: integral of the current.
double mean_velocity(const Wavefunction& psi);
// <psi|phi> = dx * sum conj(psi_i) phi_i.
cplx overlap(const Wavefunction& psi, const Wavefunction& phi);

// Normalized Gaussian amplitude pi^-1/4 w^-1/2 exp(-(x-c)^2/(2 w^2) + i k x).
Wavefunction gaussian(GridPtr grid, double center, double width, double wavenumber = 0.0);

}  // namespace sapbohm
