#include "sapbohm/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "sapbohm/errors.hpp"
#include "sapbohm/spectral.hpp"

namespace sapbohm {

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw ConfigError("grid extent must satisfy x_min < x_max (got [" + std::to_string(x_min) +
                      ", " + std::to_string(x_max) + "])");
  }
  if (n_points < 256 || !std::has_single_bit(n_points)) {
    throw ConfigError("grid n_points must be a power of two >= 256 (got " +
                      std::to_string(n_points) + ")");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points);
  x_.resize(n_);
  k_.resize(n_);
  const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n_) * dx_);
  const auto half = static_cast<long long>(n_ / 2);
  for (std::size_t i = 0; i < n_; ++i) {
    x_[i] = x_min_ + static_cast<double>(i) * dx_;
    const auto j = static_cast<long long>(i);
    k_[i] = dk * static_cast<double>(j < half ? j : j - static_cast<long long>(n_));
  }
}

std::size_t Grid::floor_index(double x) const noexcept {
  const double r = std::floor((x - x_min_) / dx_);
  if (!(r > 0.0)) return 0;
  if (r >= static_cast<double>(n_ - 1)) return n_ - 1;
  return static_cast<std::size_t>(r);
}

GridPtr make_grid(double x_min, double x_max, std::size_t n_points) {
  return std::make_shared<const Grid>(x_min, x_max, n_points);
}

double integrate(std::span<const double> f, double dx) noexcept {
  return dx * std::accumulate(f.begin(), f.end(), 0.0);
}

double norm(const Wavefunction& psi) {
  double s = 0.0;
  for (const auto& v : psi.values) s += std::norm(v);
  return s * psi.grid->dx();
}

void normalize(Wavefunction& psi) {
  const double n = norm(psi);
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("cannot normalize a zero or non-finite state");
  const double s = 1.0 / std::sqrt(n);
  for (auto& v : psi.values) v *= s;
}

RealField density(const Wavefunction& psi) {
  RealField rho(psi.size());
  std::transform(psi.values.begin(), psi.values.end(), rho.begin(),
                 [](const cplx& v) { return std::norm(v); });
  return rho;
}

ComplexField gradient(const Wavefunction& psi) {
  return spectral_derivative(*psi.grid, psi.values, 1);
}

ComplexField laplacian(const Wavefunction& psi) {
  return spectral_derivative(*psi.grid, psi.values, 2);
}

RealField current(const Wavefunction& psi) {
  const auto d = gradient(psi);
  RealField j(psi.size());
  for (std::size_t i = 0; i < j.size(); ++i) j[i] = std::imag(std::conj(psi.values[i]) * d[i]);
  return j;
}

VelocityField velocity_field(const Wavefunction& psi, double density_floor) {
  const auto j = current(psi);
  VelocityField out{RealField(psi.size(), 0.0), std::vector<bool>(psi.size(), false)};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    if (rho > density_floor) {
      out.velocity[i] = j[i] / rho;
      out.valid[i] = true;
    }
  }
  return out;
}

Populations populations(const Wavefunction& psi, double x0) {
  const Grid& g = *psi.grid;
  if (!(x0 > 0.0) || !(x0 < g.x_max()) || !(-x0 > g.x_min())) {
    throw ConfigError("population boundary x0 = " + std::to_string(x0) + " is outside the grid");
  }
  Populations p;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    const double x = g.x(i);
    if (x < -x0) {
      p.left += rho;
    } else if (x <= x0) {
      p.middle += rho;
    } else {
      p.right += rho;
    }
  }
  p.left *= g.dx();
  p.middle *= g.dx();
  p.right *= g.dx();
  return p;
}

double mean_position(const Wavefunction& psi) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    num += psi.grid->x(i) * rho;
    den += rho;
  }
  return num / den;
}

double mean_velocity(const Wavefunction& psi) {
  const auto j = current(psi);
  return integrate(j, psi.grid->dx()) / norm(psi);
}

cplx overlap(const Wavefunction& psi, const Wavefunction& phi) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) s += std::conj(psi.values[i]) * phi.values[i];
  return s * psi.grid->dx();
}

Wavefunction gaussian(GridPtr grid, double center, double width, double wavenumber) {
  Wavefunction psi(grid);
  const double amp = 1.0 / std::sqrt(std::sqrt(std::numbers::pi) * width);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double d = grid->x(i) - center;
    psi.values[i] = amp * std::exp(-d * d / (2.0 * width * width)) *
                    std::polar(1.0, wavenumber * grid->x(i));
  }
  return psi;
}

}  // namespace sapbohm
