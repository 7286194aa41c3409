#include "sapbohm/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "sapbohm/errors.hpp"

namespace sapbohm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Indices of the trajectories written to the trajectory CSV, spread evenly
// over the ensemble.
std::vector<std::size_t> output_indices(std::size_t n, std::size_t m) {
  std::vector<std::size_t> out;
  if (m == 0) return out;
  for (std::size_t i = 0; i < m; ++i) {
    out.push_back(std::min(n - 1, (2 * i + 1) * n / (2 * m)));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Streaming consumer of the propagator: node tracking every snapshot and the
// trajectory ensemble advanced window by window.
class RunObserver {
 public:
  RunObserver(const RunConfig& cfg, GridPtr grid, const Wavefunction& psi0, RunResult& result,
              const RunHooks& hooks)
      : cfg_(cfg),
        grid_(grid),
        params_(cfg.potential_params()),
        result_(result),
        hooks_(hooks),
        stride_(cfg.dynamics.snapshot_stride),
        tracker_(grid, params_, cfg.dynamics.dt * static_cast<double>(stride_),
                 cfg.analysis.barrier_fraction),
        scratch_(grid) {
    if (cfg.trajectories.enabled) {
      window_ = std::make_unique<FrameWindow>(grid, cfg.dynamics.dt, stride_ + 1);
      auto x = sample_initial(psi0, cfg.trajectories.count);
      result_.initial_positions = x;
      ensemble_ = std::make_unique<TrajectoryEnsemble>(std::move(x), 0.0,
                                                       cfg.trajectory_options());
      chosen_ = output_indices(cfg.trajectories.count, cfg.trajectories.output_count);
    }
  }

  void operator()(const FrameView& f) {
    while (next_capture_ < hooks_.capture_times.size() &&
           f.time >= hooks_.capture_times[next_capture_] - 1e-9 * cfg_.dynamics.dt) {
      if (hooks_.on_capture) hooks_.on_capture(as_wavefunction(f));
      ++next_capture_;
    }
    const auto node = tracker_.locate(f.time, f.values);
    if (ensemble_) {
      window_->push(f.time, f.values, node ? node->position : FrameWindow::kNoNode);
    }
    if (!f.snapshot) return;

    if (node) tracker_.add(f.time, f.values);
    if (hooks_.on_frame_dump && cfg_.output.dump_frames &&
        (snapshots_ % cfg_.output.frame_stride == 0 || f.step_index == last_step_)) {
      hooks_.on_frame_dump(as_wavefunction(f));
    }
    if (ensemble_) advance(f);
    ++snapshots_;
  }

  void set_last_step(std::size_t s) { last_step_ = s; }

  void finish() {
    result_.node_track = tracker_.finish(cfg_.analysis.smoothing_window);
    if (!ensemble_) return;
    result_.final_positions = ensemble_->positions();
    result_.crossings = ensemble_->crossings();
    result_.first_crossings = ensemble_->first_crossings();
    result_.rk_accepted = ensemble_->accepted_steps();
    result_.rk_rejected = ensemble_->rejected_steps();
  }

 private:
  const Wavefunction& as_wavefunction(const FrameView& f) {
    std::copy(f.values.begin(), f.values.end(), scratch_.values.begin());
    scratch_.time = f.time;
    return scratch_;
  }

  void advance(const FrameView& f) {
    if (!failed_) {
      try {
        ensemble_->advance(*window_);
      } catch (const StiffnessError& e) {
        fail("stiff", e.what());
      } catch (const TrajectoryError& e) {
        fail("trajectory_error", e.what());
      }
    }
    if (!failed_) record(f);
    window_->roll();
  }

  void fail(const char* status, const std::string& what) {
    failed_ = true;
    result_.status = status;
    result_.message = what;
    // Keep what was integrated so far.
    result_.final_positions = ensemble_->positions();
  }

  void record(const FrameView& f) {
    const Wavefunction& psi = as_wavefunction(f);
    const auto v = ensemble_->velocities(*window_);
    const auto& x = ensemble_->positions();
    auto& d = result_.diagnostics;

    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    const auto cdf = cumulative_density(psi);
    const double inv_n = 1.0 / static_cast<double>(x.size());
    double vsum = 0.0;
    double xsum = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      vsum += v[k];
      xsum += x[k];
    }
    const auto j = current(psi);
    d.times.push_back(f.time);
    d.ks_distance.push_back(ks_distance(*grid_, cdf, sorted));
    d.ensemble_velocity.push_back(vsum * inv_n);
    d.current_integral.push_back(integrate(j, grid_->dx()));
    d.ensemble_position.push_back(xsum * inv_n);
    d.mean_position.push_back(mean_position(psi));
    if (!ensemble_->ordered()) d.ordering_preserved = false;

    if (snapshots_ % cfg_.trajectories.output_stride == 0 || f.step_index == last_step_) {
      for (std::size_t k : chosen_) {
        result_.trajectory_samples.push_back({k, f.time, x[k], v[k]});
      }
    }
  }

  const RunConfig& cfg_;
  GridPtr grid_;
  PotentialParams params_;
  RunResult& result_;
  const RunHooks& hooks_;
  std::size_t stride_;
  NodeTracker tracker_;
  Wavefunction scratch_;
  std::unique_ptr<FrameWindow> window_;
  std::unique_ptr<TrajectoryEnsemble> ensemble_;
  std::vector<std::size_t> chosen_;
  std::size_t snapshots_ = 0;
  std::size_t next_capture_ = 0;
  std::size_t last_step_ = 0;
  bool failed_ = false;
};

void summarize(RunResult& r) {
  const auto& rec = r.record;
  if (rec.times.empty()) return;
  const auto& last = rec.populations.back();
  r.final_left = last.left;
  r.final_middle = last.middle;
  r.final_right = last.right;
  for (const auto& p : rec.populations) r.max_middle = std::max(r.max_middle, p.middle);
  for (std::size_t i = 1; i < rec.times.size(); ++i) {
    const double dt = rec.times[i] - rec.times[i - 1];
    if (dt <= 0.0) continue;
    const double v = std::abs(rec.mean_positions[i] - rec.mean_positions[i - 1]) / dt;
    r.max_mean_velocity = std::max(r.max_mean_velocity, v);
  }
  r.norm_drift = rec.max_norm_drift();

  const NodeTrack& track = r.node_track;
  r.max_node_density = track.max_density();
  r.node_flux = node_flux(track);
  if (track.size() >= 2) r.vmax_integral = vmax_integral(track);
  r.vmax_mean = r.crossings.empty() ? kNaN : vmax_ensemble(r.crossings, r.initial_positions.size());
}

}  // namespace

RunResult run_transport(const RunConfig& config, const RunHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  RunResult r;
  r.config = config;
  const GridPtr grid = config.make_grid();
  const PotentialParams p = config.potential_params();
  r.ground = ground_state(p, grid, config.well(), config.dynamics.g, config.imaginary_time());

  const PropagationConfig pc = config.propagation();
  RunObserver observer(config, grid, r.ground.psi, r, hooks);
  observer.set_last_step(pc.step_count());
  const FrameObserver obs = [&observer](const FrameView& f) { observer(f); };

  try {
    r.record = propagate(r.ground.psi, pc, p, std::span<const FrameObserver>(&obs, 1));
  } catch (const PropagationError& e) {
    r.status = "propagation_error";
    r.message = e.what();
    observer.finish();
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }
  observer.finish();
  r.trajectories_completed = config.trajectories.enabled && r.status == "ok";

  try {
    summarize(r);
  } catch (const AnalysisError& e) {
    if (r.status == "ok") {
      r.status = "analysis_error";
      r.message = e.what();
    }
  }
  if (r.status == "ok" && r.final_right < config.analysis.transfer_threshold) {
    r.status = "breakdown";
    r.message = "final P_R below " + std::to_string(config.analysis.transfer_threshold);
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ScalingPoint scaling_point(const RunResult& r) {
  ScalingPoint s;
  s.t_p = r.config.potential.t_p;
  s.g = r.config.dynamics.g;
  s.vmax_mean = r.vmax_mean;
  s.vmax_integral = r.vmax_integral.total;
  s.max_mean_velocity = r.max_mean_velocity;
  s.max_node_density = r.max_node_density;
  s.node_flux = r.node_flux;
  s.final_right = r.final_right;
  s.max_middle = r.max_middle;
  s.status = r.status;
  s.message = r.message;
  s.wall_seconds = r.wall_seconds;
  return s;
}

std::vector<ScalingPoint> sweep(const std::vector<double>& t_p_values,
                                const std::vector<double>& g_values, const RunConfig& base,
                                std::size_t workers,
                                const std::function<void(const RunResult&)>& on_result) {
  struct Job {
    double t_p;
    double g;
  };
  std::vector<Job> jobs;
  for (double t : t_p_values) {
    for (double g : g_values) jobs.push_back({t, g});
  }
  // Longest runs first so the pool drains evenly.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return jobs[a].t_p > jobs[b].t_p; });

  std::vector<ScalingPoint> points(jobs.size());
  std::mutex mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard lock(mutex);
        if (next == order.size()) return;
        idx = order[next++];
      }
      RunConfig cfg = base;
      cfg.potential.t_p = jobs[idx].t_p;
      cfg.dynamics.g = jobs[idx].g;
      ScalingPoint pt;
      pt.t_p = jobs[idx].t_p;
      pt.g = jobs[idx].g;
      try {
        RunResult r = run_transport(cfg);
        pt = scaling_point(r);
        if (on_result) {
          std::lock_guard lock(mutex);
          on_result(r);
        }
      } catch (const ConfigError& e) {
        pt.status = "config_error";
        pt.message = e.what();
      } catch (const PreparationError& e) {
        pt.status = "preparation_error";
        pt.message = e.what();
      } catch (const std::exception& e) {
        pt.status = "error";
        pt.message = e.what();
      }
      if (pt.status != "ok" && pt.status != "breakdown") {
        pt.vmax_mean = pt.vmax_integral = pt.max_mean_velocity = kNaN;
        pt.max_node_density = pt.node_flux = kNaN;
        if (pt.final_right == 0.0) pt.final_right = pt.max_middle = kNaN;
      }
      std::lock_guard lock(mutex);
      points[idx] = pt;
    }
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::stable_sort(points.begin(), points.end(), [](const ScalingPoint& a, const ScalingPoint& b) {
    return a.t_p < b.t_p || (a.t_p == b.t_p && a.g < b.g);
  });
  return points;
}

std::vector<ScalingFit> fit_scaling(const std::vector<ScalingPoint>& points) {
  std::vector<double> gs;
  for (const auto& p : points) {
    if (std::find(gs.begin(), gs.end(), p.g) == gs.end()) gs.push_back(p.g);
  }
  std::sort(gs.begin(), gs.end());

  struct Quantity {
    const char* name;
    double ScalingPoint::*field;
  };
  const Quantity quantities[] = {{"vmax_mean", &ScalingPoint::vmax_mean},
                                 {"max_mean_velocity", &ScalingPoint::max_mean_velocity},
                                 {"max_node_density", &ScalingPoint::max_node_density}};

  std::vector<ScalingFit> fits;
  for (double g : gs) {
    for (const auto& q : quantities) {
      ScalingFit f;
      f.quantity = q.name;
      f.g = g;
      for (const auto& p : points) {
        if (p.g != g || p.status != "ok") continue;
        f.t_p.push_back(p.t_p);
        f.values.push_back(p.*(q.field));
      }
      try {
        f.fit = fit_powerlaw(f.t_p, f.values);
        f.ok = true;
      } catch (const AnalysisError& e) {
        f.error = e.what();
      }
      fits.push_back(std::move(f));
    }
  }
  return fits;
}

}  // namespace sapbohm
