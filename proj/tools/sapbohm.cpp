// Command-line driver: groundstate, run and sweep.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sapbohm/config.hpp"
#include "sapbohm/errors.hpp"
#include "sapbohm/output.hpp"
#include "sapbohm/pipeline.hpp"
#include "sapbohm/stationary.hpp"

namespace fs = std::filesystem;
using namespace sapbohm;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kPreparation = 3,
  kPropagation = 4,
  kTrajectory = 5,
  kAnalysis = 6,
};

int exit_for_status(const std::string& status) {
  if (status == "ok" || status == "breakdown") return kOk;
  if (status == "config_error") return kConfig;
  if (status == "preparation_error") return kPreparation;
  if (status == "propagation_error") return kPropagation;
  if (status == "stiff" || status == "trajectory_error") return kTrajectory;
  if (status == "analysis_error") return kAnalysis;
  return kFailure;
}

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration (defaults when omitted)");
  cmd->add_option("--out", c.out, "output directory (overrides output.directory)");
  cmd->add_option("--override", c.overrides, "block.key=value, repeatable")->take_all();
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (!c.out.empty()) cfg.output.directory = c.out;
  cfg.validate();
  return cfg;
}

std::string run_label(double t_p, double g) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "tp%g_g%g", t_p, g);
  return buf;
}

int cmd_groundstate(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  output::write_config(dir, cfg);
  const GroundState gs = ground_state(cfg.potential_params(), cfg.make_grid(), cfg.well(),
                                      cfg.dynamics.g, cfg.imaginary_time());
  output::write_state(dir / "groundstate.csv", gs.psi, "imaginary-time ground state");
  const auto summary = output::groundstate_summary(cfg, gs);
  output::write_json(dir / "groundstate.json", summary);
  std::printf("groundstate well=%s energy=%.10f mu=%.10f steps=%zu P_L=%.6f P_M=%.3e P_R=%.3e\n",
              cfg.groundstate.well.c_str(), gs.energy, gs.chemical_potential, gs.steps,
              summary["P_L"].get<double>(), summary["P_M"].get<double>(),
              summary["P_R"].get<double>());
  return kOk;
}

int cmd_run(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  output::write_config(dir, cfg);

  RunHooks hooks;
  if (cfg.output.dump_frames) {
    std::size_t index = 0;
    hooks.on_frame_dump = [&dir, &index](const Wavefunction& psi) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06zu.csv", index++);
      output::write_state(dir / "frames" / name, psi, "wavefunction snapshot");
    };
  }
  const RunResult r = run_transport(cfg, hooks);
  output::write_run(dir, r);
  std::fprintf(stderr, "run finished in %.1f s\n", r.wall_seconds);
  std::printf("run t_p=%g g=%g status=%s final_P_R=%.6f max_P_M=%.6f node_flux=%.6f "
              "v_max_mean=%.6g v_max_integral=%.6g transported=%zu\n",
              cfg.potential.t_p, cfg.dynamics.g, r.status.c_str(), r.final_right, r.max_middle,
              r.node_flux, r.vmax_mean, r.vmax_integral.total, r.transported_count());
  if (!r.message.empty() && r.status != "ok") std::fprintf(stderr, "%s\n", r.message.c_str());
  return exit_for_status(r.status);
}

int cmd_sweep(const Common& c) {
  const RunConfig cfg = resolve(c);
  const fs::path dir = cfg.output.directory;
  fs::create_directories(dir);
  output::write_config(dir, cfg);

  const auto points =
      sweep(cfg.analysis.sweep_t_p, cfg.analysis.sweep_g, cfg, cfg.analysis.workers,
            [&dir](const RunResult& r) {
              output::write_run(dir / "runs" / run_label(r.config.potential.t_p, r.config.dynamics.g), r);
            });
  output::write_sweep_summary(dir / "sweep_summary.csv", points);
  const auto fits = fit_scaling(points);
  output::write_json(dir / "fit_report.json", output::fit_report(fits));

  int first_failure = kOk;
  bool any_ok = false;
  for (const auto& p : points) {
    std::printf("sweep t_p=%g g=%g status=%s v_max_mean=%.6g max_mean_velocity=%.6g "
                "max_node_density=%.6g node_flux=%.6f final_P_R=%.6f\n",
                p.t_p, p.g, p.status.c_str(), p.vmax_mean, p.max_mean_velocity, p.max_node_density,
                p.node_flux, p.final_right);
    const int code = exit_for_status(p.status);
    if (code == kOk) {
      any_ok = true;
    } else if (first_failure == kOk) {
      first_failure = code;
    }
  }
  for (const auto& f : fits) {
    if (f.ok) {
      std::printf("fit %s g=%g exponent=%.4f r2=%.5f\n", f.quantity.c_str(), f.g, f.fit.exponent,
                  f.fit.r_squared);
    } else {
      std::printf("fit %s g=%g failed: %s\n", f.quantity.c_str(), f.g, f.error.c_str());
    }
  }
  return any_ok || points.empty() ? kOk : first_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adiabatic transport in a triple well: wavefunction and Bohmian trajectories"};
  app.require_subcommand(1);
  Common gs_opts, run_opts, sweep_opts;
  auto* gs = app.add_subcommand("groundstate", "prepare the initial state by imaginary time");
  auto* run = app.add_subcommand("run", "propagate one protocol with trajectories");
  auto* sw = app.add_subcommand("sweep", "run every (t_p, g) of the sweep lists and fit");
  add_common(gs, gs_opts);
  add_common(run, run_opts);
  add_common(sw, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gs) return cmd_groundstate(gs_opts);
    if (*run) return cmd_run(run_opts);
    if (*sw) return cmd_sweep(sweep_opts);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const PreparationError& e) {
    std::cerr << "preparation error: " << e.what() << '\n';
    return kPreparation;
  } catch (const PropagationError& e) {
    std::cerr << "propagation error: " << e.what() << '\n';
    return kPropagation;
  } catch (const TrajectoryError& e) {
    std::cerr << "trajectory error: " << e.what() << '\n';
    return kTrajectory;
  } catch (const AnalysisError& e) {
    std::cerr << "analysis error: " << e.what() << '\n';
    return kAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
