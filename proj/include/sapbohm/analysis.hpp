#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sapbohm/grid.hpp"
#include "sapbohm/potential.hpp"
#include "sapbohm/propagator.hpp"

namespace sapbohm {

// Position of the density minimum strictly inside (-x0, x0): grid argmin
// refined by the parabola through the three neighbouring samples. Returns
// nullopt when the minimum sits on the boundary of the region (no interior
// minimum).
std::optional<double> locate_node(const Grid& grid, std::span<const cplx> values, double x0);

struct NodePoint {
  double position = 0.0;
  // False when the minimum sits on the edge of (-x0, x0): the node has moved
  // onto a barrier and the point is held at the edge.
  bool interior = true;
};
// Like locate_node, but a minimum on the edge of the central region yields
// that edge (-x0 or +x0) instead of nothing.
NodePoint node_point(const Grid& grid, std::span<const cplx> values, double x0);

// The node is tracked only while both barriers are below this fraction of V_max.
bool in_track_window(double t, const PotentialParams& p, double barrier_fraction = 0.5) noexcept;

struct NodeTrack {
  std::vector<double> times;
  std::vector<double> positions;
  std::vector<double> densities;
  std::vector<double> currents;
  std::vector<double> velocities;  // smoothed dx_n/dt
  std::vector<bool> interior;      // see NodePoint
  // Times at which consecutive samples are further apart than the sampling
  // step: the track has a gap after each of these.
  std::vector<double> gaps;
  double sample_dt = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  double begin_time() const noexcept { return times.empty() ? 0.0 : times.front(); }
  double end_time() const noexcept { return times.empty() ? 0.0 : times.back(); }
  // Largest density over interior samples.
  double max_density() const noexcept;
};

// Accumulates node samples frame by frame while a run is in progress.
class NodeTracker {
 public:
  NodeTracker(GridPtr grid, PotentialParams params, double sample_dt,
              double barrier_fraction = 0.5);

  // The node of this frame, if the frame belongs to the track window.
  std::optional<NodePoint> locate(double t, std::span<const cplx> values) const;
  // Records a sample; returns false if the frame has no node.
  bool add(double t, std::span<const cplx> values);
  // Smooths the node velocity with a centred moving average over `window` samples.
  NodeTrack finish(std::size_t smoothing_window = 11) const;

 private:
  GridPtr grid_;
  PotentialParams params_;
  double sample_dt_;
  double barrier_fraction_;
  NodeTrack track_;
};

// Post-hoc tracking from a RunRecord with stored frames.
NodeTrack track_node(const RunRecord& record, const PotentialParams& p,
                     std::size_t smoothing_window = 11, double barrier_fraction = 0.5);

// Centred differences of the positions smoothed by a moving average; samples
// separated by a gap are treated as separate segments.
std::vector<double> smoothed_node_velocity(const NodeTrack& track, std::size_t window);

// Trapezoidal integral of J(x_n(t), t) over the track.
double node_flux(const NodeTrack& track);

struct VmaxIntegral {
  double total = 0.0;
  double first_term = 0.0;   // integral of J^2 / |psi|^2 at the node
  double second_term = 0.0;  // integral of J dx_n/dt
  // Fraction of [begin, end] covered by gap-free sampling.
  double coverage = 0.0;
};
// integral over the track of J^2/|psi|^2 - J dx_n/dt at the node.
VmaxIntegral vmax_integral(const NodeTrack& track);

// Discrete residual of d_t rho + d_x J between consecutive frames: the time
// derivative by forward difference, the flux divergence spectrally from the
// average of the two currents. Returns the L2 norm per frame pair.
std::vector<double> continuity_residual(std::span<const Wavefunction> frames);

struct QuantumPotential {
  RealField values;
  std::vector<bool> valid;
};
// Q = -(1/2) |psi|'' / |psi|, from spectral derivatives of psi via
// |psi|''/|psi| = Re(psi^* psi'')/|psi|^2 + v^2. Points at or below the
// density floor are marked invalid.
QuantumPotential quantum_potential(const Wavefunction& psi,
                                   double density_floor = kDefaultDensityFloor);

struct PowerLawFit {
  double exponent = 0.0;
  double amplitude = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // log(y) - log(fit) per point
};
// Least squares of log y against log x. Throws AnalysisError for fewer than
// three points or any non-positive value.
PowerLawFit fit_powerlaw(std::span<const double> x, std::span<const double> y);

}  // namespace sapbohm
