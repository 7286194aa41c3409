#pragma once

#include "sapbohm/grid.hpp"

namespace sapbohm {

// Triple-well potential: a unit-frequency harmonic trap with two Gaussian
// barriers at -x0 (left, height V_12) and +x0 (right, height V_23).
//
// The barrier heights follow a quartic pulse
//   h(t') = V_max                                   t' <= 0 or t' >= t_p
//         = (V_max - V_min)(2 t'/t_p - 1)^4 + V_min  otherwise
// with V_23(t) = h(t) and V_12(t) = h(t - t_d): the right barrier is lowered
// first (counter-intuitive ordering). The protocol lasts T = t_p + t_d.
struct PotentialParams {
  double v_min = 5.0;
  double v_max = 1000.0;
  double sigma = 0.16;
  double x0 = 0.48;
  double t_p = 5000.0;
  double t_d = 750.0;
  // false drops both Gaussian barriers, leaving the bare harmonic trap.
  bool barriers = true;

  static PotentialParams with_pulse(double t_p, double t_d_fraction = 0.15);
  static PotentialParams bare_trap();

  double total_time() const noexcept { return t_p + t_d; }
  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

double barrier_height(double t, double t_offset, const PotentialParams& p) noexcept;

struct BarrierHeights {
  double left = 0.0;   // V_12
  double right = 0.0;  // V_23
};
BarrierHeights barrier_heights(double t, const PotentialParams& p) noexcept;

double potential(double x, double t, const PotentialParams& p) noexcept;

// Position-dependent pieces of the potential tabulated on a grid, so that
// V(x_i, t) = harmonic_i + V_12(t) left_i + V_23(t) right_i is evaluated with
// the same operations, in the same order, as the scalar potential().
struct PotentialProfile {
  RealField harmonic;
  RealField left;
  RealField right;
  // Index range [begin, end) outside which both Gaussians are below 1e-20.
  std::size_t barrier_begin = 0;
  std::size_t barrier_end = 0;

  PotentialProfile(const Grid& grid, const PotentialParams& p);
  void evaluate(double t, const PotentialParams& p, std::span<double> out) const noexcept;
};

RealField schedule_snapshot(double t, const PotentialParams& p, const Grid& grid);

}  // namespace sapbohm
