#include "sapbohm/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "sapbohm/errors.hpp"
#include "sapbohm/units.hpp"

namespace sapbohm::output {

using nlohmann::json;

namespace {

std::ofstream open(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

void header(std::ofstream& out, const std::string& title, const std::string& columns) {
  out << "# " << title << '\n';
  out << "# units: " << units::kDescription << '\n';
  out << columns << '\n';
}

void close(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out) throw Error("write failed: " + file.string());
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void write_json(const std::filesystem::path& file, const json& j) {
  auto out = open(file);
  out << j.dump(2) << '\n';
  close(out, file);
}

void write_config(const std::filesystem::path& dir, const RunConfig& cfg) {
  write_json(dir / "config.json", cfg.to_json());
}

void write_state(const std::filesystem::path& file, const Wavefunction& psi,
                 const std::string& title) {
  auto out = open(file);
  header(out, title + "; t = " + number(psi.time), "x,re_psi,im_psi,density");
  const Grid& g = *psi.grid;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    out << number(g.x(i)) << ',' << number(psi.values[i].real()) << ','
        << number(psi.values[i].imag()) << ',' << number(std::norm(psi.values[i])) << '\n';
  }
  close(out, file);
}

void write_populations(const std::filesystem::path& file, const RunRecord& record) {
  auto out = open(file);
  header(out, "populations of x < -x0, |x| <= x0, x > x0 and the mean position",
         "t,P_L,P_M,P_R,<x>");
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const auto& p = record.populations[i];
    out << number(record.times[i]) << ',' << number(p.left) << ',' << number(p.middle) << ','
        << number(p.right) << ',' << number(record.mean_positions[i]) << '\n';
  }
  close(out, file);
}

void write_trajectories(const std::filesystem::path& file,
                        const std::vector<TrajectorySample>& samples) {
  auto out = open(file);
  header(out, "Bohmian trajectories (k is the 0-based ensemble index)", "k,t,x,v");
  for (const auto& s : samples) {
    out << s.trajectory << ',' << number(s.time) << ',' << number(s.position) << ','
        << number(s.velocity) << '\n';
  }
  close(out, file);
}

void write_crossings(const std::filesystem::path& file,
                     const std::vector<CrossingRecord>& crossings) {
  auto out = open(file);
  header(out, "first left-to-right node crossing per trajectory", "k,t_n,x_n,v_n");
  for (const auto& c : crossings) {
    out << c.trajectory << ',' << number(c.time) << ',' << number(c.position) << ','
        << number(c.velocity) << '\n';
  }
  close(out, file);
}

void write_node_track(const std::filesystem::path& file, const NodeTrack& track) {
  auto out = open(file);
  header(out, "density minimum in (-x0, x0); interior = 0 where it sits on the edge",
         "t,x_n,density,current,dxn_dt,interior");
  for (std::size_t i = 0; i < track.size(); ++i) {
    const bool interior = i < track.interior.size() ? track.interior[i] : true;
    const double v = i < track.velocities.size() ? track.velocities[i] : 0.0;
    out << number(track.times[i]) << ',' << number(track.positions[i]) << ','
        << number(track.densities[i]) << ',' << number(track.currents[i]) << ',' << number(v)
        << ',' << (interior ? 1 : 0) << '\n';
  }
  close(out, file);
}

void write_diagnostics(const std::filesystem::path& file, const EnsembleDiagnostics& d) {
  auto out = open(file);
  header(out, "trajectory ensemble against the wavefunction, one row per snapshot",
         "t,ks_distance,ensemble_velocity,current_integral,ensemble_position,mean_position");
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    out << number(d.times[i]) << ',' << number(d.ks_distance[i]) << ','
        << number(d.ensemble_velocity[i]) << ',' << number(d.current_integral[i]) << ','
        << number(d.ensemble_position[i]) << ',' << number(d.mean_position[i]) << '\n';
  }
  close(out, file);
}

json groundstate_summary(const RunConfig& cfg, const GroundState& gs) {
  const auto pops = populations(gs.psi, cfg.potential.x0);
  return {{"units", units::kDescription},
          {"well", cfg.groundstate.well},
          {"g", cfg.dynamics.g},
          {"energy", gs.energy},
          {"chemical_potential", gs.chemical_potential},
          {"steps", gs.steps},
          {"norm", norm(gs.psi)},
          {"P_L", pops.left},
          {"P_M", pops.middle},
          {"P_R", pops.right},
          {"mean_position", mean_position(gs.psi)}};
}

json run_summary(const RunResult& r) {
  double ks = 0.0;
  double v_err = 0.0;
  double x_err = 0.0;
  const auto& d = r.diagnostics;
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    ks = std::max(ks, d.ks_distance[i]);
    v_err = std::max(v_err, std::abs(d.ensemble_velocity[i] - d.current_integral[i]));
    x_err = std::max(x_err, std::abs(d.ensemble_position[i] - d.mean_position[i]));
  }
  json j;
  j["units"] = units::kDescription;
  j["status"] = r.status;
  j["message"] = r.message;
  j["t_p"] = r.config.potential.t_p;
  j["t_d"] = r.config.potential_params().t_d;
  j["g"] = r.config.dynamics.g;
  j["ground_energy"] = r.ground.energy;
  j["ground_chemical_potential"] = r.ground.chemical_potential;
  j["final_P_L"] = r.final_left;
  j["final_P_M"] = r.final_middle;
  j["final_P_R"] = r.final_right;
  j["max_P_M"] = r.max_middle;
  j["norm_drift"] = r.norm_drift;
  j["max_mean_velocity"] = r.max_mean_velocity;
  j["max_node_density"] = r.max_node_density;
  j["node_flux"] = r.node_flux;
  j["v_max_mean"] = finite_or_null(r.vmax_mean);
  j["v_max_integral"] = {{"total", r.vmax_integral.total},
                         {"first_term", r.vmax_integral.first_term},
                         {"second_term", r.vmax_integral.second_term},
                         {"coverage", r.vmax_integral.coverage}};
  if (!r.first_crossings.empty()) {
    double lo = r.first_crossings.front().velocity;
    double hi = lo;
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& c : r.first_crossings) {
      lo = std::min(lo, c.velocity);
      hi = std::max(hi, c.velocity);
      sum += c.velocity;
      sq += c.velocity * c.velocity;
    }
    const double n = static_cast<double>(r.first_crossings.size());
    const double mean = sum / n;
    j["first_crossing_velocity"] = {{"mean", mean},
                              {"std", std::sqrt(std::max(0.0, sq / n - mean * mean))},
                              {"min", lo},
                              {"max", hi}};
  } else {
    j["first_crossing_velocity"] = nullptr;
  }
  j["node_track"] = {{"samples", r.node_track.size()},
                     {"begin", r.node_track.begin_time()},
                     {"end", r.node_track.end_time()}};
  const std::size_t count = r.config.trajectories.enabled ? r.config.trajectories.count : 0;
  j["trajectories"] = {{"count", count},
                       {"completed", r.trajectories_completed},
                       {"transported", r.transported_count()},
                       {"crossing_events", r.crossings.size()},
                       {"rk_accepted", r.rk_accepted},
                       {"rk_rejected", r.rk_rejected},
                       {"max_ks_distance", ks},
                       {"max_mean_velocity_error", v_err},
                       {"max_mean_position_error", x_err},
                       {"ordering_preserved", d.ordering_preserved}};
  return j;
}

void write_run(const std::filesystem::path& dir, const RunResult& r) {
  std::filesystem::create_directories(dir);
  write_config(dir, r.config);
  write_populations(dir / "populations.csv", r.record);
  write_node_track(dir / "node_track.csv", r.node_track);
  if (r.config.trajectories.enabled) {
    write_trajectories(dir / "trajectories.csv", r.trajectory_samples);
    write_crossings(dir / "crossings.csv", r.first_crossings);
    write_diagnostics(dir / "diagnostics.csv", r.diagnostics);
  }
  write_json(dir / "summary.json", run_summary(r));
}

void write_sweep_summary(const std::filesystem::path& file,
                         const std::vector<ScalingPoint>& points) {
  auto out = open(file);
  header(out, "one row per (t_p, g) run",
         "t_p,g,v_max_mean,v_max_integral,max_mean_velocity,max_node_density,node_flux,final_P_R,"
         "max_P_M,status");
  for (const auto& p : points) {
    out << number(p.t_p) << ',' << number(p.g) << ',' << number(p.vmax_mean) << ','
        << number(p.vmax_integral) << ',' << number(p.max_mean_velocity) << ','
        << number(p.max_node_density) << ',' << number(p.node_flux) << ','
        << number(p.final_right) << ',' << number(p.max_middle) << ',' << p.status << '\n';
  }
  close(out, file);
}

json fit_report(const std::vector<ScalingFit>& fits) {
  json j;
  j["units"] = units::kDescription;
  j["model"] = "y = amplitude * t_p^exponent, least squares on log y vs log t_p";
  json arr = json::array();
  for (const auto& f : fits) {
    json e;
    e["quantity"] = f.quantity;
    e["g"] = f.g;
    e["ok"] = f.ok;
    e["t_p"] = f.t_p;
    e["values"] = f.values;
    if (f.ok) {
      e["exponent"] = f.fit.exponent;
      e["amplitude"] = f.fit.amplitude;
      e["r_squared"] = f.fit.r_squared;
      e["residuals"] = f.fit.residuals;
    } else {
      e["error"] = f.error;
    }
    arr.push_back(std::move(e));
  }
  j["fits"] = std::move(arr);
  return j;
}

}  // namespace sapbohm::output
