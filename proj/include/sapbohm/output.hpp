#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapbohm/config.hpp"
#include "sapbohm/pipeline.hpp"

namespace sapbohm::output {

// Fixed "%.12e" formatting so repeated runs give byte-identical files.
std::string number(double v);

void write_config(const std::filesystem::path& dir, const RunConfig& cfg);

// Columns: x, re_psi, im_psi, density.
void write_state(const std::filesystem::path& file, const Wavefunction& psi,
                 const std::string& title);

// Columns: t, P_L, P_M, P_R, <x>.
void write_populations(const std::filesystem::path& file, const RunRecord& record);
// Columns: k, t, x, v.
void write_trajectories(const std::filesystem::path& file,
                        const std::vector<TrajectorySample>& samples);
// Columns: k, t_n, x_n, v_n.
void write_crossings(const std::filesystem::path& file,
                     const std::vector<CrossingRecord>& crossings);
// Columns: t, x_n, density, current, dxn_dt, interior.
void write_node_track(const std::filesystem::path& file, const NodeTrack& track);
// Columns: t, ks_distance, ensemble_velocity, current_integral, ensemble_position, mean_position.
void write_diagnostics(const std::filesystem::path& file, const EnsembleDiagnostics& d);

nlohmann::json run_summary(const RunResult& r);
nlohmann::json groundstate_summary(const RunConfig& cfg, const GroundState& gs);

// Every file of a run: populations, trajectories, crossings, node track,
// diagnostics, summary.json and the config echo.
void write_run(const std::filesystem::path& dir, const RunResult& r);

// Columns: t_p, g, v_max_mean, v_max_integral, max_mean_velocity,
// max_node_density, node_flux, final_P_R, max_P_M, status.
void write_sweep_summary(const std::filesystem::path& file, const std::vector<ScalingPoint>& points);
nlohmann::json fit_report(const std::vector<ScalingFit>& fits);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);

}  // namespace sapbohm::output
