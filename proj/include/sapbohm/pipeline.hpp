#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "sapbohm/analysis.hpp"
#include "sapbohm/bohm.hpp"
#include "sapbohm/config.hpp"
#include "sapbohm/propagator.hpp"
#include "sapbohm/stationary.hpp"

namespace sapbohm {

// Per-snapshot consistency between the trajectory ensemble and the wavefunction.
struct EnsembleDiagnostics {
  std::vector<double> times;
  std::vector<double> ks_distance;
  std::vector<double> ensemble_velocity;  // (1/N) sum of trajectory velocities
  std::vector<double> current_integral;   // integral of J dx
  std::vector<double> ensemble_position;  // (1/N) sum of x_k
  std::vector<double> mean_position;      // <x>
  bool ordering_preserved = true;
};

struct TrajectorySample {
  std::size_t trajectory;
  double time;
  double position;
  double velocity;
};

struct RunResult {
  RunConfig config;
  std::string status = "ok";
  std::string message;

  GroundState ground;
  RunRecord record;
  NodeTrack node_track;

  std::vector<double> initial_positions;
  std::vector<double> final_positions;
  std::vector<CrossingRecord> crossings;        // every detected sign change
  std::vector<CrossingRecord> first_crossings;  // first left-to-right per trajectory
  std::vector<TrajectorySample> trajectory_samples;
  EnsembleDiagnostics diagnostics;
  std::size_t rk_accepted = 0;
  std::size_t rk_rejected = 0;
  bool trajectories_completed = false;

  double final_left = 0.0;
  double final_middle = 0.0;
  double final_right = 0.0;
  double max_middle = 0.0;
  double max_mean_velocity = 0.0;
  double max_node_density = 0.0;
  double node_flux = 0.0;
  double vmax_mean = 0.0;  // see vmax_ensemble
  VmaxIntegral vmax_integral;
  double norm_drift = 0.0;
  double wall_seconds = 0.0;

  std::size_t transported_count() const noexcept { return first_crossings.size(); }
};

struct RunHooks {
  // Wavefunctions captured at the first step whose time is >= each entry.
  std::vector<double> capture_times;
  std::function<void(const Wavefunction&)> on_capture;
  // Called with every snapshot when frame dumps are enabled.
  std::function<void(const Wavefunction&)> on_frame_dump;
};

// Ground state preparation, propagation over the protocol, streaming node
// tracking and trajectory integration, then the node diagnostics.
// PreparationError and ConfigError propagate; errors during propagation or
// trajectory integration are recorded in status/message.
RunResult run_transport(const RunConfig& config, const RunHooks& hooks = {});

struct ScalingPoint {
  double t_p = 0.0;
  double g = 0.0;
  double vmax_mean = 0.0;
  double vmax_integral = 0.0;
  double max_mean_velocity = 0.0;
  double max_node_density = 0.0;
  double node_flux = 0.0;
  double final_right = 0.0;
  double max_middle = 0.0;
  std::string status;
  std::string message;
  double wall_seconds = 0.0;
};

ScalingPoint scaling_point(const RunResult& r);

// Runs every (t_p, g) pair on a worker pool; failures are recorded per point.
// Results are ordered by (t_p, g). `on_result` (optional) sees every full
// RunResult as soon as it completes, serialized under a lock.
std::vector<ScalingPoint> sweep(const std::vector<double>& t_p_values,
                                const std::vector<double>& g_values, const RunConfig& base,
                                std::size_t workers = 0,
                                const std::function<void(const RunResult&)>& on_result = {});

struct ScalingFit {
  std::string quantity;
  double g = 0.0;
  bool ok = false;
  std::string error;
  PowerLawFit fit;
  std::vector<double> t_p;
  std::vector<double> values;
};

// Power-law fits of vmax_mean, max_mean_velocity and max_node_density
// against t_p for each g, over points with status "ok".
std::vector<ScalingFit> fit_scaling(const std::vector<ScalingPoint>& points);

}  // namespace sapbohm
