#include "sapbohm/potential.hpp"

#include <cmath>
#include <string>

#include "sapbohm/errors.hpp"

namespace sapbohm {

PotentialParams PotentialParams::with_pulse(double t_p, double t_d_fraction) {
  PotentialParams p;
  p.t_p = t_p;
  p.t_d = t_d_fraction * t_p;
  return p;
}

PotentialParams PotentialParams::bare_trap() {
  PotentialParams p;
  p.barriers = false;
  return p;
}

void PotentialParams::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("potential: " + msg); };
  if (barriers && !(0.0 < v_min && v_min < v_max)) fail("require 0 < V_min < V_max");
  if (!(sigma > 0.0)) fail("require sigma > 0");
  if (!(x0 > 0.0)) fail("require x0 > 0");
  if (!(t_p > 0.0)) fail("require t_p > 0");
  if (!(t_d >= 0.0 && t_d < t_p)) fail("require 0 <= t_d < t_p");
  if (!std::isfinite(v_max) || !std::isfinite(t_p + t_d)) fail("non-finite parameter");
}

double barrier_height(double t, double t_offset, const PotentialParams& p) noexcept {
  if (!p.barriers) return 0.0;
  const double s = t - t_offset;
  if (s <= 0.0 || s >= p.t_p) return p.v_max;
  const double u = 2.0 * s / p.t_p - 1.0;
  const double u2 = u * u;
  return (p.v_max - p.v_min) * (u2 * u2) + p.v_min;
}

BarrierHeights barrier_heights(double t, const PotentialParams& p) noexcept {
  return {barrier_height(t, p.t_d, p), barrier_height(t, 0.0, p)};
}

namespace {

inline double gauss(double d, double sigma) noexcept {
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

}  // namespace

double potential(double x, double t, const PotentialParams& p) noexcept {
  const auto h = barrier_heights(t, p);
  const double harmonic = 0.5 * x * x;
  const double left = p.barriers ? gauss(x + p.x0, p.sigma) : 0.0;
  const double right = p.barriers ? gauss(x - p.x0, p.sigma) : 0.0;
  return harmonic + h.left * left + h.right * right;
}

PotentialProfile::PotentialProfile(const Grid& grid, const PotentialParams& p)
    : harmonic(grid.size()), left(grid.size()), right(grid.size()) {
  const double cutoff = 1e-20;
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    harmonic[i] = 0.5 * x * x;
    left[i] = p.barriers ? gauss(x + p.x0, p.sigma) : 0.0;
    right[i] = p.barriers ? gauss(x - p.x0, p.sigma) : 0.0;
    if (left[i] > cutoff || right[i] > cutoff) {
      if (!any) barrier_begin = i;
      barrier_end = i + 1;
      any = true;
    }
  }
}

void PotentialProfile::evaluate(double t, const PotentialParams& p,
                                std::span<double> out) const noexcept {
  const auto h = barrier_heights(t, p);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = harmonic[i] + h.left * left[i] + h.right * right[i];
  }
}

RealField schedule_snapshot(double t, const PotentialParams& p, const Grid& grid) {
  RealField v(grid.size());
  PotentialProfile(grid, p).evaluate(t, p, v);
  return v;
}

}  // namespace sapbohm
