#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapbohm/bohm.hpp"
#include "sapbohm/grid.hpp"
#include "sapbohm/potential.hpp"
#include "sapbohm/propagator.hpp"
#include "sapbohm/stationary.hpp"

namespace sapbohm {

struct GridConfig {
  double x_min = -12.0;
  double x_max = 12.0;
  std::size_t n_points = 2048;
};

struct PotentialConfig {
  double v_min = 5.0;
  double v_max = 1000.0;
  double sigma = 0.16;
  double x0 = 0.48;
  double t_p = 5000.0;
  double t_d_fraction = 0.15;
  bool barriers = true;
};

struct GroundStateConfig {
  std::string well = "left";
  double dtau = 1e-3;
  double tolerance = 1e-10;
  std::size_t max_steps = 2'000'000;
};

struct DynamicsConfig {
  double dt = 5e-4;
  double g = 0.0;
  std::size_t snapshot_stride = 100;
  // Negative means the end of the protocol, T = t_p + t_d.
  double t_end = -1.0;
};

struct TrajectoryConfig {
  bool enabled = true;
  std::size_t count = 1000;
  std::size_t output_count = 50;
  // Trajectory CSV rows are written every output_stride snapshots.
  std::size_t output_stride = 20;
  double abs_tol = 1e-6;
  double rel_tol = 1e-6;
  double min_step = 1e-12;
  double density_floor = kDefaultDensityFloor;
  std::size_t threads = 1;
};

struct AnalysisConfig {
  std::size_t smoothing_window = 11;
  double barrier_fraction = 0.5;
  // Runs whose final P_R falls below this are reported as "breakdown".
  double transfer_threshold = 0.99;
  std::vector<double> sweep_t_p{1000.0, 2000.0, 3000.0, 4000.0, 5000.0};
  std::vector<double> sweep_g{0.0, 0.2, 0.5};
  // Concurrent sweep points; 0 picks the hardware concurrency.
  std::size_t workers = 0;
};

struct OutputConfig {
  std::string directory = "out";
  bool dump_frames = false;
  // Frames are dumped every frame_stride snapshots when dump_frames is set.
  std::size_t frame_stride = 100;
};

struct RunConfig {
  GridConfig grid;
  PotentialConfig potential;
  GroundStateConfig groundstate;
  DynamicsConfig dynamics;
  TrajectoryConfig trajectories;
  AnalysisConfig analysis;
  OutputConfig output;

  PotentialParams potential_params() const;
  GridPtr make_grid() const;
  Well well() const;
  ImaginaryTimeOptions imaginary_time() const;
  PropagationConfig propagation() const;
  TrajectoryOptions trajectory_options() const;

  // Checks every module-level precondition; throws ConfigError.
  void validate() const;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Applies "block.key=value"; the value is parsed as JSON when possible
  // (numbers, booleans, arrays) and taken as a string otherwise.
  void apply_override(const std::string& assignment);
};

}  // namespace sapbohm
