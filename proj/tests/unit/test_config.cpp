#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sapbohm/config.hpp"
#include "sapbohm/errors.hpp"
#include "sapbohm/output.hpp"
#include "sapbohm/pipeline.hpp"

using namespace sapbohm;
using nlohmann::json;

namespace {

RunConfig short_run(double t_p) {
  RunConfig c;
  c.potential.t_p = t_p;
  c.trajectories.count = 100;
  c.trajectories.output_count = 10;
  return c;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c;
  CHECK_NOTHROW(c.validate());
  const auto p = c.potential_params();
  CHECK(p.v_min == 5.0);
  CHECK(p.v_max == 1000.0);
  CHECK(p.sigma == 0.16);
  CHECK(p.x0 == 0.48);
  CHECK(p.t_d == doctest::Approx(0.15 * p.t_p));
  CHECK(c.propagation().t_end == doctest::Approx(p.total_time()));
  CHECK(c.trajectories.count == 1000);
  CHECK(c.trajectories.output_count == 50);
  CHECK(c.analysis.smoothing_window == 11);
  CHECK(c.analysis.sweep_g == std::vector<double>{0.0, 0.2, 0.5});
}

TEST_CASE("JSON round trip and strict keys") {
  RunConfig c;
  c.potential.t_p = 1234.0;
  c.dynamics.g = 0.2;
  c.groundstate.well = "right";
  const auto back = RunConfig::from_json(c.to_json());
  CHECK(back.to_json() == c.to_json());

  json j = c.to_json();
  j["grid"]["nonsense"] = 1;
  CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
  json k = {{"bogus_block", json::object()}};
  CHECK_THROWS_AS(RunConfig::from_json(k), ConfigError);
  json wrong = {{"grid", {{"n_points", "many"}}}};
  CHECK_THROWS_AS(RunConfig::from_json(wrong), ConfigError);
  json negative = {{"trajectories", {{"count", -5}}}};
  CHECK_THROWS_AS(RunConfig::from_json(negative), ConfigError);

  // Partial files keep the defaults for everything else.
  const auto partial = RunConfig::from_json(json{{"potential", {{"t_p", 2000.0}}}});
  CHECK(partial.potential.t_p == 2000.0);
  CHECK(partial.grid.n_points == 2048);
}

TEST_CASE("load from file") {
  const auto dir = std::filesystem::temp_directory_path() / "sapbohm_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "c.json");
    f << "{\n  // comment\n  \"dynamics\": {\"g\": 0.5}\n}\n";
  }
  CHECK(RunConfig::load(dir / "c.json").dynamics.g == 0.5);
  CHECK_THROWS_AS(RunConfig::load(dir / "missing.json"), ConfigError);
  {
    std::ofstream f(dir / "bad.json");
    f << "{ not json";
  }
  CHECK_THROWS_AS(RunConfig::load(dir / "bad.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("overrides") {
  RunConfig c;
  c.apply_override("potential.t_p=3000");
  c.apply_override("dynamics.g=0.5");
  c.apply_override("groundstate.well=middle");
  c.apply_override("potential.barriers=false");
  c.apply_override("analysis.sweep_t_p=[1000,2000]");
  c.apply_override("output.directory=123");
  CHECK(c.potential.t_p == 3000.0);
  CHECK(c.dynamics.g == 0.5);
  CHECK(c.groundstate.well == "middle");
  CHECK_FALSE(c.potential.barriers);
  CHECK(c.analysis.sweep_t_p == std::vector<double>{1000.0, 2000.0});
  CHECK(c.output.directory == "123");
  CHECK_THROWS_AS(c.apply_override("potential.t_p"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("t_p=5"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("potential.nope=5"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("dynamics.g=abc"), ConfigError);
}

TEST_CASE("validation") {
  auto bad = [](auto mutate) {
    RunConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.potential.t_p = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.grid.n_points = 1000; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.dynamics.dt = 0.01; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.dynamics.g = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.groundstate.well = "up"; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.trajectories.count = 1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.trajectories.output_count = 5000; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.potential.x0 = 20.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](RunConfig& c) { c.potential.t_d_fraction = 1.0; }).validate(), ConfigError);
  CHECK_NOTHROW(bad([](RunConfig& c) { c.trajectories.enabled = false; c.trajectories.count = 0; }).validate());
}

TEST_CASE("number formatting is fixed") {
  CHECK(output::number(1.0) == "1.000000000000e+00");
  CHECK(output::number(-0.00123) == "-1.230000000000e-03");
  CHECK(output::number(std::nan("")) == "nan");
}

TEST_CASE("short pipeline run") {
  const RunConfig c = short_run(20.0);
  const auto a = run_transport(c);
  const auto b = run_transport(c);
  CHECK(a.status == "breakdown");
  CHECK(a.final_right < 0.99);
  CHECK(a.record.times.back() == doctest::Approx(23.0));
  CHECK(a.initial_positions.size() == 100);
  CHECK(a.diagnostics.ordering_preserved);
  // Deterministic.
  CHECK(a.final_positions == b.final_positions);
  CHECK(output::run_summary(a).dump() == output::run_summary(b).dump());
  // Trajectory CSV rows: 10 trajectories at every output instant.
  CHECK(a.trajectory_samples.size() % 10 == 0);
  // A flux through the node can only carry what reached the right well.
  CHECK(a.node_flux == doctest::Approx(a.final_right).epsilon(0.05));
}

TEST_CASE("captures and trajectories switch") {
  RunConfig c = short_run(10.0);
  c.trajectories.enabled = false;
  RunHooks hooks;
  hooks.capture_times = {0.0, 5.0, 11.0};
  std::vector<double> seen;
  hooks.on_capture = [&](const Wavefunction& psi) { seen.push_back(psi.time); };
  const auto r = run_transport(c, hooks);
  REQUIRE(seen.size() == 3);
  CHECK(seen[1] == doctest::Approx(5.0));
  CHECK(r.trajectory_samples.empty());
  CHECK(std::isnan(r.vmax_mean));
}

TEST_CASE("sweep records per-point failures and fits only good points") {
  RunConfig c = short_run(10.0);
  c.trajectories.count = 20;
  c.trajectories.output_count = 2;
  const auto pts = sweep({10.0, -5.0}, {0.0}, c, 2);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].t_p == -5.0);
  CHECK(pts[0].status == "config_error");
  CHECK(pts[1].status == "breakdown");
  const auto fits = fit_scaling(pts);
  REQUIRE(fits.size() == 3);
  for (const auto& f : fits) {
    CHECK_FALSE(f.ok);
    CHECK_FALSE(f.error.empty());
  }
}
