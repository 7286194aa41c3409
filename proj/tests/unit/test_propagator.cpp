#include <doctest.h>

#include <cmath>
#include <limits>

#include "sapbohm/errors.hpp"
#include "sapbohm/propagator.hpp"
#include "sapbohm/stationary.hpp"

using namespace sapbohm;

namespace {

GridPtr default_grid() { return make_grid(-12.0, 12.0, 2048); }

double l2_distance(const Wavefunction& a, const Wavefunction& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.values[i] - b.values[i]);
  return std::sqrt(s * a.grid->dx());
}

}  // namespace

TEST_CASE("harmonic ground state is stationary") {
  auto g = default_grid();
  const auto bare = PotentialParams::bare_trap();
  const auto psi0 = gaussian(g, 0.0, 1.0);
  PropagationConfig cfg;
  cfg.t_end = 1e4 * cfg.dt;
  const auto rec = propagate(psi0, cfg, bare);
  CHECK(std::abs(overlap(psi0, rec.final_state)) >= 1.0 - 1e-8);
  CHECK(rec.max_norm_drift() < 1e-10);
}

TEST_CASE("coherent state follows cos(t)") {
  auto g = default_grid();
  const auto bare = PotentialParams::bare_trap();
  const auto psi0 = gaussian(g, 1.0, 1.0);
  PropagationConfig cfg;
  cfg.t_end = 2.0 * 3.141592653589793;
  cfg.snapshot_stride = 200;
  const auto rec = propagate(psi0, cfg, bare);
  double err = 0.0;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    err = std::max(err, std::abs(rec.mean_positions[i] - std::cos(rec.times[i])));
  }
  CHECK(err < 1e-4);
}

TEST_CASE("Ehrenfest: integral of J equals d<x>/dt") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(100.0);
  auto psi = ground_state(p, g, Well::left, 0.0).psi;
  // Advance into the transfer so that the state is genuinely dynamic.
  PropagationConfig cfg;
  cfg.t_end = 55.0;
  cfg.snapshot_stride = 1000;
  const auto mid = propagate(psi, cfg, p).final_state;
  const double h = cfg.dt;
  // Centred difference around the middle of three consecutive states.
  const auto fwd = step(mid, cfg, p);
  const auto fwd2 = step(fwd, cfg, p);
  const double dxdt = (mean_position(fwd2) - mean_position(mid)) / (2.0 * h);
  const double jint = mean_velocity(fwd);
  CHECK(std::abs(jint) > 1e-4);
  CHECK(std::abs(jint - dxdt) < 1e-6);
}

TEST_CASE("nonlinear phase on a uniform field") {
  auto g = make_grid(-1.0, 1.0, 256);
  const auto bare = PotentialParams::bare_trap();
  Wavefunction psi(g);
  for (auto& z : psi.values) z = cplx(0.5, 0.0);
  PropagationConfig lin;
  lin.dt = 1e-4;
  PropagationConfig nl = lin;
  nl.g = 0.5;
  const auto a = step(psi, lin, bare);
  const auto b = step(psi, nl, bare);
  const cplx expected = std::polar(1.0, -nl.g * 0.25 * nl.dt);
  double err = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(b.values[i] / a.values[i] - expected));
  CHECK(err < 1e-11);
}

TEST_CASE("norm is conserved per step and over a run") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(200.0);
  auto psi = ground_state(p, g, Well::left, 0.5).psi;
  PropagationConfig cfg;
  cfg.g = 0.5;
  cfg.t_start = 30.0;
  psi.time = 30.0;
  const auto once = step(psi, cfg, p);
  CHECK(std::abs(norm(once) - norm(psi)) < 1e-12);
  cfg.t_end = 40.0;
  const auto rec = propagate(psi, cfg, p);
  CHECK(rec.max_norm_drift() < 1e-10);
  for (std::size_t i = 1; i < rec.times.size(); ++i) CHECK(rec.times[i] > rec.times[i - 1]);
}

TEST_CASE("zero-duration run returns psi0") {
  auto g = default_grid();
  const auto psi0 = gaussian(g, -1.0, 0.4, 0.3);
  PropagationConfig cfg;
  cfg.t_start = cfg.t_end = 5.0;
  const auto rec = propagate(psi0, cfg, PotentialParams::with_pulse(100.0));
  REQUIRE(rec.times.size() == 1);
  CHECK(rec.final_state.values == psi0.values);
}

TEST_CASE("energy is conserved while the potential is frozen") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);
  // Before the pulse both barriers sit at V_max.
  auto drift = [&](Wavefunction psi, double dt) {
    PropagationConfig cfg;
    cfg.dt = dt;
    cfg.t_start = -10.0;
    cfg.t_end = 0.0;
    psi.time = cfg.t_start;
    const double e0 = total_energy(psi, p, cfg.t_start, 0.0);
    const auto rec = propagate(psi, cfg, p);
    return std::abs(total_energy(rec.final_state, p, 0.0, 0.0) - e0) / std::abs(e0);
  };
  CHECK(drift(ground_state(p, g, Well::left, 0.0).psi, 5e-4) < 1e-6);

  // A fast packet pressed into a barrier: splitting error, second order in dt.
  const auto packet = gaussian(g, -1.2, 0.5, 0.8);
  const double coarse = drift(packet, 5e-4);
  const double fine = drift(packet, 2.5e-4);
  CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("second-order convergence in dt") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(100.0);
  auto psi = ground_state(p, g, Well::left, 0.0).psi;
  psi.time = 50.0;
  auto run = [&](double dt) {
    PropagationConfig cfg;
    cfg.dt = dt;
    cfg.t_start = 50.0;
    cfg.t_end = 51.0;
    cfg.snapshot_stride = 100000;
    return propagate(psi, cfg, p).final_state;
  };
  const auto ref = run(1.0 / 16384);
  const double e1 = l2_distance(run(1.0 / 1024), ref);
  const double e2 = l2_distance(run(1.0 / 2048), ref);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("Crank-Nicolson oracle") {
  auto g = default_grid();
  const auto bare = PotentialParams::bare_trap();

  SUBCASE("stationary state and norm") {
    const auto psi0 = gaussian(g, 0.0, 1.0);
    CrankNicolsonPropagator cn(g, bare, 0.0, 5e-4);
    cn.load(psi0);
    const auto one = [&] { cn.step(); return cn.state(); }();
    CHECK(std::abs(norm(one) - 1.0) < 1e-10);
    for (int i = 0; i < 9999; ++i) cn.step();
    // FD ground state differs from the Gaussian at O(dx^2): fidelity limited by that.
    CHECK(std::abs(overlap(psi0, cn.state())) >= 1.0 - 1e-6);
  }
  SUBCASE("coherent state") {
    const auto psi0 = gaussian(g, 1.0, 1.0);
    CrankNicolsonPropagator cn(g, bare, 0.0, 5e-4);
    cn.load(psi0);
    double err = 0.0;
    for (int i = 1; i <= 6283; ++i) {
      cn.step();
      if (i % 500 == 0) err = std::max(err, std::abs(mean_position(cn.state()) - std::cos(cn.time())));
    }
    CHECK(err < 1e-4);
  }
  SUBCASE("agrees with split-step on a short dynamic segment") {
    const auto p = PotentialParams::with_pulse(100.0);
    auto psi = ground_state(p, g, Well::left, 0.0).psi;
    PropagationConfig cfg;
    cfg.t_end = 1.0;
    const auto ss = propagate(psi, cfg, p).final_state;
    CrankNicolsonPropagator cn(g, p, 0.0, cfg.dt);
    cn.load(psi);
    for (std::size_t i = 0; i < cfg.step_count(); ++i) cn.step();
    CHECK(l2_distance(ss, cn.state()) < 1e-3);
  }
  SUBCASE("free cn_step matches the class") {
    const auto psi0 = gaussian(g, 0.5, 0.7, 1.0);
    PropagationConfig cfg;
    const auto a = cn_step(psi0, cfg, bare);
    CrankNicolsonPropagator cn(g, bare, 0.0, cfg.dt);
    cn.load(psi0);
    cn.step();
    CHECK(l2_distance(a, cn.state()) < 1e-15);
  }
}

TEST_CASE("invalid configuration and non-finite states") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(100.0);
  PropagationConfig cfg;
  cfg.dt = 2e-3;  // 2 rad per half step at V_max
  CHECK_THROWS_AS(cfg.validate(p), ConfigError);
  cfg.dt = 5e-4;
  cfg.snapshot_stride = 0;
  CHECK_THROWS_AS(cfg.validate(p), ConfigError);

  PropagationConfig ok;
  ok.t_end = 0.01;
  auto psi = gaussian(g, 0.0, 1.0);
  psi.values[100] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(propagate(psi, ok, p), PropagationError);
  CHECK_THROWS_AS(step(psi, ok, p), PropagationError);
}
