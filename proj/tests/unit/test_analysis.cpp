#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sapbohm/analysis.hpp"
#include "sapbohm/errors.hpp"
#include "sapbohm/propagator.hpp"
#include "sapbohm/stationary.hpp"

using namespace sapbohm;

namespace {

GridPtr default_grid() { return make_grid(-12.0, 12.0, 2048); }

// (x - a + i eps) exp(-x^2/2): density minimum eps^2 exp(-a^2) at x = a.
Wavefunction dipped(GridPtr g, double a, double eps) {
  Wavefunction psi(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->x(i);
    psi.values[i] = cplx(x - a, eps) * std::exp(-0.5 * x * x);
  }
  return psi;
}

NodeTrack synthetic_track(double dt, std::size_t n) {
  NodeTrack t;
  t.sample_dt = dt;
  for (std::size_t i = 0; i < n; ++i) {
    const double time = dt * static_cast<double>(i);
    t.times.push_back(time);
    t.positions.push_back(0.3 - 0.01 * time);
    t.densities.push_back(1e-3);
    t.currents.push_back(0.5);
    t.interior.push_back(true);
  }
  return t;
}

}  // namespace

TEST_CASE("node location") {
  auto g = default_grid();
  const auto psi = dipped(g, 0.1, 0.0);
  const auto xn = locate_node(*g, psi.values, 0.48);
  REQUIRE(xn);
  CHECK(*xn == doctest::Approx(0.1).epsilon(1e-3 / 0.1));

  // No interior minimum: monotone density across the central region.
  const auto ramp = gaussian(g, -2.0, 1.0);
  CHECK_FALSE(locate_node(*g, ramp.values, 0.48));
  const auto np = node_point(*g, ramp.values, 0.48);
  CHECK_FALSE(np.interior);
  CHECK(np.position == 0.48);
  const auto np2 = node_point(*g, gaussian(g, 2.0, 1.0).values, 0.48);
  CHECK(np2.position == -0.48);
  CHECK(node_point(*g, psi.values, 0.48).interior);
}

TEST_CASE("track window follows the barrier heights") {
  const auto p = PotentialParams::with_pulse(1000.0);
  CHECK_FALSE(in_track_window(0.0, p));
  CHECK(in_track_window(0.5 * p.total_time(), p));
  CHECK_FALSE(in_track_window(p.total_time(), p));
  CHECK_FALSE(in_track_window(500.0, PotentialParams::bare_trap()));
}

TEST_CASE("smoothed node velocity of a uniform drift") {
  const auto t = synthetic_track(0.05, 200);
  const auto v = smoothed_node_velocity(t, 11);
  for (double x : v) CHECK(x == doctest::Approx(-0.01).epsilon(1e-9));
}

TEST_CASE("node flux and the two-term velocity integral") {
  auto t = synthetic_track(0.05, 201);
  t.velocities = smoothed_node_velocity(t, 11);
  CHECK(node_flux(t) == doctest::Approx(0.5 * 10.0).epsilon(1e-12));
  const auto vi = vmax_integral(t);
  CHECK(vi.first_term == doctest::Approx(0.25 / 1e-3 * 10.0).epsilon(1e-12));
  CHECK(vi.second_term == doctest::Approx(0.5 * -0.01 * 10.0).epsilon(1e-9));
  CHECK(vi.total == doctest::Approx(vi.first_term - vi.second_term));
  CHECK(vi.coverage == doctest::Approx(1.0));

  // A gap splits the quadrature and lowers the coverage.
  NodeTrack gapped = t;
  gapped.times.erase(gapped.times.begin() + 100, gapped.times.begin() + 150);
  gapped.positions.erase(gapped.positions.begin() + 100, gapped.positions.begin() + 150);
  gapped.densities.erase(gapped.densities.begin() + 100, gapped.densities.begin() + 150);
  gapped.currents.erase(gapped.currents.begin() + 100, gapped.currents.begin() + 150);
  gapped.interior.erase(gapped.interior.begin() + 100, gapped.interior.begin() + 150);
  gapped.velocities = smoothed_node_velocity(gapped, 11);
  CHECK(vmax_integral(gapped).coverage < 0.8);
  CHECK(node_flux(gapped) < node_flux(t));
}

TEST_CASE("stationary state: zero flux and zero velocity integral") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);
  const double t_mid = 0.5 * p.total_time();
  const auto sol = eigenstates(p, t_mid, g, 3);
  NodeTracker tracker(g, p, 0.05);
  Wavefunction psi = sol.state(1);
  for (int i = 0; i < 50; ++i) tracker.add(t_mid + 0.05 * i, psi.values);
  const auto track = tracker.finish(11);
  REQUIRE(track.size() == 50);
  CHECK(std::abs(node_flux(track)) < 1e-14);
  CHECK(std::abs(vmax_integral(track).total) < 1e-14);
}

TEST_CASE("max density ignores edge samples") {
  auto t = synthetic_track(0.05, 10);
  t.densities[3] = 0.5;
  t.interior[3] = false;
  CHECK(t.max_density() == doctest::Approx(1e-3));
}

TEST_CASE("continuity residual") {
  auto g = default_grid();
  const auto bare = PotentialParams::bare_trap();

  SUBCASE("frozen stationary state: roundoff") {
    std::vector<Wavefunction> frames{gaussian(g, 0.0, 1.0), gaussian(g, 0.0, 1.0)};
    frames[1].time = 0.05;
    const auto r = continuity_residual(frames);
    REQUIRE(r.size() == 1);
    CHECK(r[0] < 1e-10);
  }
  SUBCASE("refinement lowers the residual about fourfold") {
    auto residual = [&](double spacing) {
      PropagationConfig cfg;
      cfg.dt = spacing / 10.0;
      cfg.t_end = 1.0;
      cfg.snapshot_stride = 10;
      cfg.store_frames = true;
      const auto rec = propagate(gaussian(g, 1.0, 0.8, 0.5), cfg, bare);
      double m = 0.0;
      for (double v : continuity_residual(rec.frames)) m = std::max(m, v);
      return m;
    };
    const double coarse = residual(0.02);
    const double fine = residual(0.01);
    CHECK(fine < coarse);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.25));
  }
  SUBCASE("time order is enforced") {
    std::vector<Wavefunction> frames{gaussian(g, 0.0, 1.0), gaussian(g, 0.0, 1.0)};
    CHECK_THROWS_AS(continuity_residual(frames), AnalysisError);
  }
}

TEST_CASE("quantum potential") {
  auto g = default_grid();

  SUBCASE("oscillator ground state: Q + V = E") {
    const auto q = quantum_potential(gaussian(g, 0.0, 1.0));
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double x = g->x(i);
      if (std::abs(x) < 4.0) {
        REQUIRE(q.valid[i]);
        CHECK(q.values[i] + 0.5 * x * x == doctest::Approx(0.5).epsilon(1e-8));
      }
    }
  }
  SUBCASE("flat envelope: Q vanishes") {
    const auto q = quantum_potential(gaussian(g, 0.0, 40.0, 1.5));
    CHECK(std::abs(q.values[g->floor_index(0.0)]) < 1e-3);
  }
  SUBCASE("quasi-node: large spike of Q") {
    const auto psi = dipped(g, 0.05, 1e-2);
    const auto q = quantum_potential(psi);
    const std::size_t at = g->floor_index(0.05);
    const std::size_t away = g->floor_index(1.0);
    // Q = -(1/2)|psi|''/|psi| is negative at a density minimum, of size 1/(2 eps^2).
    CHECK(q.values[at] < -1e3);
    CHECK(std::abs(q.values[at]) > 100.0 * std::abs(q.values[away]));
  }
}

TEST_CASE("power-law fits") {
  const std::vector<double> x{1000.0, 2000.0, 3000.0, 4000.0, 5000.0};
  std::vector<double> lin, inv2;
  for (double v : x) {
    lin.push_back(3e-3 * v);
    inv2.push_back(7.0 / (v * v));
  }
  const auto a = fit_powerlaw(x, lin);
  CHECK(a.exponent == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(a.amplitude == doctest::Approx(3e-3).epsilon(1e-9));
  CHECK(a.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  const auto b = fit_powerlaw(x, inv2);
  CHECK(b.exponent == doctest::Approx(-2.0).epsilon(1e-10));
  for (double r : b.residuals) CHECK(std::abs(r) < 1e-10);

  CHECK_THROWS_AS(fit_powerlaw(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}), AnalysisError);
  CHECK_THROWS_AS(fit_powerlaw(x, std::vector<double>{1.0, 2.0, 0.0, 4.0, 5.0}), AnalysisError);
}
