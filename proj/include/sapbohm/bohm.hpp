#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "sapbohm/grid.hpp"

namespace sapbohm {

// Cumulative density F(x_i) on the grid by the trapezoidal rule, normalized
// so that F(x_{n-1}) = 1. Between grid points F is linear.
RealField cumulative_density(const Wavefunction& psi);
double cdf_at(const Grid& grid, std::span<const double> cdf, double x) noexcept;

// Deterministic quantile sampling: x_k solves F(x_k) = (k - 1/2) / n for
// k = 1..n. Throws ConfigError for n < 2 or a state whose norm is not 1.
std::vector<double> sample_initial(const Wavefunction& psi0, std::size_t n);

// Two-sided Kolmogorov-Smirnov distance between the empirical distribution of
// sorted positions and the cumulative density.
double ks_distance(const Grid& grid, std::span<const double> cdf, std::span<const double> sorted);

struct FieldSample {
  double density = 0.0;
  double current = 0.0;
  double velocity = 0.0;
};

// psi and d psi/dx at x from the four-point cubic through the surrounding grid
// values. Requires x_1 <= x < x_{n-2}.
struct LocalAmplitude {
  cplx value;
  cplx slope;
};
LocalAmplitude interpolate_amplitude(const Grid& grid, std::span<const cplx> values, double x) noexcept;
FieldSample sample_field(const Grid& grid, std::span<const cplx> values, double x) noexcept;

// Sequence of consecutive wavefunction frames, equally spaced in time,
// together with the dark-state node position of each frame (NaN where no
// node is defined). The guidance field between frames is linear in time and,
// within a frame, v = J/|psi|^2 evaluated from the cubic interpolant of psi.
class FrameWindow {
 public:
  FrameWindow(GridPtr grid, double frame_dt, std::size_t capacity);

  void clear() noexcept;
  // Keeps only the last frame (the start of the next window).
  void roll() noexcept;
  void push(double t, std::span<const cplx> values, double node = kNoNode);

  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  double start_time() const noexcept { return t0_; }
  double end_time() const noexcept;
  double frame_dt() const noexcept { return dt_; }
  const Grid& grid() const noexcept { return *grid_; }
  std::span<const cplx> frame(std::size_t j) const noexcept;
  double node(std::size_t j) const noexcept { return nodes_[j]; }

  struct Sample {
    FieldSample field;
    double min_density;  // smaller of the two frame densities
  };
  Sample sample(double x, double t) const noexcept;
  // Linear interpolation of the node track; nullopt if either bracketing
  // frame has no node.
  std::optional<double> node_at(double t) const noexcept;

  static constexpr double kNoNode = std::numeric_limits<double>::quiet_NaN();

 private:
  std::size_t bracket(double t, double& weight) const noexcept;

  GridPtr grid_;
  double dt_;
  std::size_t capacity_;
  std::size_t count_ = 0;
  double t0_ = 0.0;
  ComplexField data_;
  std::vector<double> nodes_;
};

struct TrajectoryOptions {
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double min_step = 1e-12;
  double initial_step = 1e-3;
  double density_floor = kDefaultDensityFloor;
  // Worker threads for the per-trajectory loop (1 = inline).
  std::size_t threads = 1;
};

struct CrossingRecord {
  std::size_t trajectory = 0;
  double time = 0.0;
  double position = 0.0;
  double velocity = 0.0;
  // +1 for a left-to-right passage, -1 for right-to-left.
  int direction = +1;
};

// Ensemble of Bohmian trajectories integrated along the guidance field with
// an adaptive Dormand-Prince 5(4) scheme. Node crossings are detected while
// advancing by watching the sign of x_k(t) - x_n(t).
class TrajectoryEnsemble {
 public:
  TrajectoryEnsemble(std::vector<double> initial_positions, double t0,
                     TrajectoryOptions options = {});

  std::size_t size() const noexcept { return positions_.size(); }
  double time() const noexcept { return time_; }
  const std::vector<double>& initial_positions() const noexcept { return initial_; }
  const std::vector<double>& positions() const noexcept { return positions_; }
  const std::vector<CrossingRecord>& crossings() const noexcept { return crossings_; }
  const TrajectoryOptions& options() const noexcept { return options_; }
  // Accepted and rejected Runge-Kutta steps so far.
  std::size_t accepted_steps() const noexcept { return accepted_; }
  std::size_t rejected_steps() const noexcept { return rejected_; }

  // Advances every trajectory from time() to window.end_time(). Throws
  // TrajectoryError (grid exit, density floor) or StiffnessError (step
  // underflow) naming the trajectory and time.
  void advance(const FrameWindow& window);

  // Guidance velocities at the current positions, evaluated on the last frame.
  std::vector<double> velocities(const FrameWindow& window) const;

  // Crossing records sorted by trajectory, first left-to-right crossing only.
  std::vector<CrossingRecord> first_crossings() const;
  // True if every adjacent pair keeps its initial ordering.
  bool ordered() const noexcept;

 private:
  struct State {
    double x;
    double h;
    int last_sign;  // sign of x - x_n at last_sign_time, 0 if unknown
  };
  struct Result {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<CrossingRecord> crossings;
  };
  Result advance_one(std::size_t k, State& s, const FrameWindow& window) const;

  TrajectoryOptions options_;
  double time_;
  std::vector<double> initial_;
  std::vector<double> positions_;
  std::vector<State> state_;
  std::vector<CrossingRecord> crossings_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

// Sign changes of x_k(t) - x_n(t) along sampled trajectories, refined by
// bisection on the linear interpolants of both. samples[k] holds positions of
// trajectory k at the given times; node holds x_n at the same times (NaN where
// undefined). The velocity of a record is the slope of the trajectory
// interpolant at the crossing.
std::vector<CrossingRecord> detect_crossings(std::span<const double> times,
                                             std::span<const std::vector<double>> samples,
                                             std::span<const double> node);

// Ensemble average of the velocity at the node: (1/N) sum of direction * v
// over every crossing event of an ensemble of N trajectories. A trajectory
// that crosses once contributes its crossing velocity; a back-and-forth
// passage adds |v| for every pass, as the flux through the node does.
// Throws AnalysisError for no crossings or N = 0.
double vmax_ensemble(std::span<const CrossingRecord> crossings, std::size_t ensemble_size);

}  // namespace sapbohm
