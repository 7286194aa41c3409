#include "sapbohm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "sapbohm/errors.hpp"

namespace sapbohm {

using nlohmann::json;

namespace {

// Reads the keys of one block, rejecting anything it does not know.
class BlockReader {
 public:
  BlockReader(const json& root, const char* name) : name_(name) {
    if (!root.contains(name)) return;
    const json& b = root.at(name);
    if (!b.is_object()) throw ConfigError(std::string("config: block '") + name + "' must be an object");
    block_ = &b;
  }

  template <class T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (block_ == nullptr || !block_->contains(key)) return;
    try {
      out = block_->at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + name_ + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    if (block_ == nullptr) return;
    for (const auto& item : block_->items()) {
      if (!known_.contains(item.key())) {
        throw ConfigError(std::string("config: unknown key ") + name_ + "." + item.key());
      }
    }
  }

 private:
  const char* name_;
  const json* block_ = nullptr;
  std::set<std::string> known_;
};

// Reject negative numbers before they reach an unsigned field.
void check_unsigned(const json& root) {
  for (const auto& block : root.items()) {
    if (!block.value().is_object()) continue;
    for (const auto& item : block.value().items()) {
      if (item.value().is_number_integer() && item.value().get<long long>() < 0) {
        // Signed fields are all floating point; a negative integer literal is
        // still a valid double, so only complain where a count is expected.
        static const std::set<std::string> counts{
            "n_points", "max_steps",       "snapshot_stride", "count",   "output_count",
            "output_stride", "threads",    "smoothing_window", "workers", "frame_stride"};
        if (counts.contains(item.key())) {
          throw ConfigError("config: " + block.key() + "." + item.key() + " must be >= 0");
        }
      }
    }
  }
}

}  // namespace

PotentialParams RunConfig::potential_params() const {
  PotentialParams p;
  p.v_min = potential.v_min;
  p.v_max = potential.v_max;
  p.sigma = potential.sigma;
  p.x0 = potential.x0;
  p.t_p = potential.t_p;
  p.t_d = potential.t_d_fraction * potential.t_p;
  p.barriers = potential.barriers;
  return p;
}

GridPtr RunConfig::make_grid() const {
  return sapbohm::make_grid(grid.x_min, grid.x_max, grid.n_points);
}

Well RunConfig::well() const {
  if (groundstate.well == "left") return Well::left;
  if (groundstate.well == "middle") return Well::middle;
  if (groundstate.well == "right") return Well::right;
  throw ConfigError("config: groundstate.well must be left, middle or right");
}

ImaginaryTimeOptions RunConfig::imaginary_time() const {
  ImaginaryTimeOptions o;
  o.dtau = groundstate.dtau;
  o.tolerance = groundstate.tolerance;
  o.max_steps = groundstate.max_steps;
  return o;
}

PropagationConfig RunConfig::propagation() const {
  PropagationConfig c;
  c.dt = dynamics.dt;
  c.g = dynamics.g;
  c.snapshot_stride = dynamics.snapshot_stride;
  c.t_start = 0.0;
  c.t_end = dynamics.t_end < 0.0 ? potential_params().total_time() : dynamics.t_end;
  return c;
}

TrajectoryOptions RunConfig::trajectory_options() const {
  TrajectoryOptions o;
  o.abs_tol = trajectories.abs_tol;
  o.rel_tol = trajectories.rel_tol;
  o.min_step = trajectories.min_step;
  o.density_floor = trajectories.density_floor;
  o.threads = trajectories.threads == 0 ? 1 : trajectories.threads;
  return o;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  make_grid();
  const PotentialParams p = potential_params();
  if (!(potential.t_d_fraction >= 0.0 && potential.t_d_fraction < 1.0)) {
    fail("potential.t_d_fraction must lie in [0, 1)");
  }
  p.validate();
  if (!(p.x0 < grid.x_max && -p.x0 > grid.x_min)) fail("potential.x0 lies outside the grid");
  well();
  if (!(groundstate.dtau > 0.0)) fail("groundstate.dtau must be > 0");
  if (!(groundstate.tolerance > 0.0)) fail("groundstate.tolerance must be > 0");
  if (groundstate.max_steps == 0) fail("groundstate.max_steps must be > 0");
  if (dynamics.t_end >= 0.0 && !std::isfinite(dynamics.t_end)) fail("dynamics.t_end must be finite");
  propagation().validate(p);
  if (trajectories.enabled) {
    if (trajectories.count < 2) fail("trajectories.count must be >= 2");
    if (trajectories.output_count > trajectories.count) {
      fail("trajectories.output_count exceeds trajectories.count");
    }
    if (trajectories.output_stride == 0) fail("trajectories.output_stride must be >= 1");
    if (!(trajectories.abs_tol > 0.0 && trajectories.rel_tol >= 0.0)) {
      fail("trajectories tolerances must be positive");
    }
    if (!(trajectories.min_step > 0.0)) fail("trajectories.min_step must be > 0");
    if (!(trajectories.density_floor >= 0.0)) fail("trajectories.density_floor must be >= 0");
  }
  if (analysis.smoothing_window == 0) fail("analysis.smoothing_window must be >= 1");
  if (!(analysis.barrier_fraction > 0.0 && analysis.barrier_fraction <= 1.0)) {
    fail("analysis.barrier_fraction must lie in (0, 1]");
  }
  for (double t : analysis.sweep_t_p) {
    if (!(t > 0.0)) fail("analysis.sweep_t_p entries must be > 0");
  }
  for (double g : analysis.sweep_g) {
    if (!(g >= 0.0)) fail("analysis.sweep_g entries must be >= 0");
  }
  if (output.frame_stride == 0) fail("output.frame_stride must be >= 1");
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> blocks{"grid",        "potential", "groundstate", "dynamics",
                                            "trajectories", "analysis", "output"};
  for (const auto& item : j.items()) {
    if (!blocks.contains(item.key())) throw ConfigError("config: unknown block " + item.key());
  }
  check_unsigned(j);

  RunConfig c;
  {
    BlockReader r(j, "grid");
    r.read("x_min", c.grid.x_min);
    r.read("x_max", c.grid.x_max);
    r.read("n_points", c.grid.n_points);
    r.finish();
  }
  {
    BlockReader r(j, "potential");
    r.read("v_min", c.potential.v_min);
    r.read("v_max", c.potential.v_max);
    r.read("sigma", c.potential.sigma);
    r.read("x0", c.potential.x0);
    r.read("t_p", c.potential.t_p);
    r.read("t_d_fraction", c.potential.t_d_fraction);
    r.read("barriers", c.potential.barriers);
    r.finish();
  }
  {
    BlockReader r(j, "groundstate");
    r.read("well", c.groundstate.well);
    r.read("dtau", c.groundstate.dtau);
    r.read("tolerance", c.groundstate.tolerance);
    r.read("max_steps", c.groundstate.max_steps);
    r.finish();
  }
  {
    BlockReader r(j, "dynamics");
    r.read("dt", c.dynamics.dt);
    r.read("g", c.dynamics.g);
    r.read("snapshot_stride", c.dynamics.snapshot_stride);
    r.read("t_end", c.dynamics.t_end);
    r.finish();
  }
  {
    BlockReader r(j, "trajectories");
    r.read("enabled", c.trajectories.enabled);
    r.read("count", c.trajectories.count);
    r.read("output_count", c.trajectories.output_count);
    r.read("output_stride", c.trajectories.output_stride);
    r.read("abs_tol", c.trajectories.abs_tol);
    r.read("rel_tol", c.trajectories.rel_tol);
    r.read("min_step", c.trajectories.min_step);
    r.read("density_floor", c.trajectories.density_floor);
    r.read("threads", c.trajectories.threads);
    r.finish();
  }
  {
    BlockReader r(j, "analysis");
    r.read("smoothing_window", c.analysis.smoothing_window);
    r.read("barrier_fraction", c.analysis.barrier_fraction);
    r.read("transfer_threshold", c.analysis.transfer_threshold);
    r.read("sweep_t_p", c.analysis.sweep_t_p);
    r.read("sweep_g", c.analysis.sweep_g);
    r.read("workers", c.analysis.workers);
    r.finish();
  }
  {
    BlockReader r(j, "output");
    r.read("directory", c.output.directory);
    r.read("dump_frames", c.output.dump_frames);
    r.read("frame_stride", c.output.frame_stride);
    r.finish();
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n_points", grid.n_points}};
  j["potential"] = {{"v_min", potential.v_min},
                    {"v_max", potential.v_max},
                    {"sigma", potential.sigma},
                    {"x0", potential.x0},
                    {"t_p", potential.t_p},
                    {"t_d_fraction", potential.t_d_fraction},
                    {"barriers", potential.barriers}};
  j["groundstate"] = {{"well", groundstate.well},
                      {"dtau", groundstate.dtau},
                      {"tolerance", groundstate.tolerance},
                      {"max_steps", groundstate.max_steps}};
  j["dynamics"] = {{"dt", dynamics.dt},
                   {"g", dynamics.g},
                   {"snapshot_stride", dynamics.snapshot_stride},
                   {"t_end", dynamics.t_end}};
  j["trajectories"] = {{"enabled", trajectories.enabled},
                       {"count", trajectories.count},
                       {"output_count", trajectories.output_count},
                       {"output_stride", trajectories.output_stride},
                       {"abs_tol", trajectories.abs_tol},
                       {"rel_tol", trajectories.rel_tol},
                       {"min_step", trajectories.min_step},
                       {"density_floor", trajectories.density_floor},
                       {"threads", trajectories.threads}};
  j["analysis"] = {{"smoothing_window", analysis.smoothing_window},
                   {"barrier_fraction", analysis.barrier_fraction},
                   {"transfer_threshold", analysis.transfer_threshold},
                   {"sweep_t_p", analysis.sweep_t_p},
                   {"sweep_g", analysis.sweep_g},
                   {"workers", analysis.workers}};
  j["output"] = {{"directory", output.directory},
                 {"dump_frames", output.dump_frames},
                 {"frame_stride", output.frame_stride}};
  return j;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form block.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("override key '" + path + "' must be block.key");
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::exception&) {
    value = text;
  }
  json j = to_json();
  const std::string block = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  if (!j.contains(block) || !j[block].contains(key)) {
    throw ConfigError("override: unknown key " + path);
  }
  // Keep string-typed fields as strings even when the text parses as JSON.
  if (j[block][key].is_string() && !value.is_string()) value = text;
  j[block][key] = value;
  *this = from_json(j);
}

}  // namespace sapbohm
