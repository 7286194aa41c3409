#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sapbohm/errors.hpp"
#include "sapbohm/stationary.hpp"

using namespace sapbohm;

namespace {

GridPtr default_grid() { return make_grid(-12.0, 12.0, 2048); }

}  // namespace

TEST_CASE("bare trap ground state is the oscillator Gaussian") {
  auto g = default_grid();
  const auto gs = ground_state(PotentialParams::bare_trap(), g, Well::middle, 0.0);
  CHECK(gs.energy == doctest::Approx(0.5).epsilon(1e-6));
  const auto ref = gaussian(g, 0.0, 1.0);
  CHECK(std::abs(overlap(ref, gs.psi)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("left-well preparation") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(5000.0);
  ImaginaryTimeOptions opt;
  opt.record_history = true;
  const auto gs = ground_state(p, g, Well::left, 0.0, opt);
  CHECK(norm(gs.psi) == doctest::Approx(1.0).epsilon(1e-9));
  const auto pops = populations(gs.psi, p.x0);
  CHECK(pops.left >= 0.999);
  CHECK(pops.middle + pops.right <= 1e-3);
  CHECK(mean_position(gs.psi) < -p.x0);
  // Edge amplitude.
  CHECK(std::abs(gs.psi.values.front()) < 1e-8);
  CHECK(std::abs(gs.psi.values.back()) < 1e-8);
  // Energy decreases monotonically between renormalized checks.
  for (std::size_t i = 1; i < gs.energy_history.size(); ++i) {
    CHECK(gs.energy_history[i] <= gs.energy_history[i - 1] + 1e-14);
  }
}

TEST_CASE("right-well preparation mirrors the left one") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);
  const auto l = ground_state(p, g, Well::left, 0.0);
  const auto r = ground_state(p, g, Well::right, 0.0);
  CHECK(r.energy == doctest::Approx(l.energy).epsilon(1e-8));
  CHECK(populations(r.psi, p.x0).right >= 0.999);
}

TEST_CASE("repulsive interaction raises the chemical potential") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(5000.0);
  const auto g0 = ground_state(p, g, Well::left, 0.0);
  const auto g5 = ground_state(p, g, Well::left, 0.5);
  CHECK(g5.chemical_potential > g0.chemical_potential);
  CHECK(g5.chemical_potential > g5.energy);
  CHECK(g0.chemical_potential == doctest::Approx(g0.energy).epsilon(1e-14));
}

TEST_CASE("non-convergence is a preparation error") {
  auto g = default_grid();
  ImaginaryTimeOptions opt;
  opt.max_steps = 200;
  CHECK_THROWS_AS(ground_state(PotentialParams::with_pulse(1000.0), g, Well::left, 0.0, opt),
                  PreparationError);
  CHECK_THROWS_AS(ground_state(PotentialParams::with_pulse(1000.0), g, Well::left, -1.0),
                  ConfigError);
}

TEST_CASE("harmonic spectrum, orthonormality and residuals") {
  auto g = default_grid();
  const auto sol = eigenstates(PotentialParams::bare_trap(), 0.0, g, 5);
  REQUIRE(sol.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(sol.energies[i] == doctest::Approx(0.5 + static_cast<double>(i)).epsilon(1e-4));
  }
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = 0; b < 5; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < g->size(); ++i) s += sol.states[a][i] * sol.states[b][i];
      CHECK(std::abs(s * g->dx() - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  }
  CHECK(sol.max_residual < 1e-6);
  CHECK_THROWS_AS(eigenstates(PotentialParams::bare_trap(), 0.0, g, 11), ConfigError);
}

TEST_CASE("frozen t <= 0 potential: outer wells are decoupled") {
  auto g = default_grid();
  const auto sol = eigenstates(PotentialParams::with_pulse(5000.0), 0.0, g, 4);
  // The left and right ground states are degenerate at V_max; the middle
  // well's ground state lies far above them.
  CHECK(sol.energies[1] - sol.energies[0] < 1e-6);
  CHECK(sol.max_residual < 1e-6);
  CHECK_THROWS_AS(three_mode_extract(sol, 0.48), AnalysisError);
}

TEST_CASE("three-mode reduction across the protocol") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);

  SUBCASE("symmetric instant") {
    const double t = 0.5 * (p.t_p + p.t_d);
    const auto m = three_mode_extract(eigenstates(p, t, g, 4), p.x0);
    CHECK(m.omega1 == doctest::Approx(m.omega2).epsilon(0.01));
    CHECK(m.theta == doctest::Approx(std::numbers::pi / 4).epsilon(0.02 / (std::numbers::pi / 4)));
    CHECK(m.omega1 >= 0.0);
  }
  SUBCASE("early: right barrier low, left at V_max") {
    const double t = 0.1 * p.t_p;
    REQUIRE(barrier_heights(t, p).left == p.v_max);
    const auto sol = eigenstates(p, t, g, 4);
    const auto m = three_mode_extract(sol, p.x0);
    CHECK(m.omega1 < 1e-3 * m.omega2);
    CHECK(m.theta < 1e-3);
    // Dark state = |L>.
    const auto d = m.dark_state();
    double s = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) s += d[i] * m.modes[0][i];
    CHECK(std::abs(s * g->dx()) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("late: theta reaches pi/2") {
    const auto m = three_mode_extract(eigenstates(p, 0.9 * p.t_p, g, 4), p.x0);
    CHECK(m.theta == doctest::Approx(std::numbers::pi / 2).epsilon(1e-3));
  }
  SUBCASE("too few states") {
    CHECK_THROWS_AS(three_mode_extract(eigenstates(p, 500.0, g, 2), p.x0), AnalysisError);
  }
}

TEST_CASE("mid-transfer dark state carries a central node") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);
  const double t = 0.5 * (p.t_p + p.t_d);
  const auto sol = eigenstates(p, t, g, 3);
  int with_node = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto nodes = interior_nodes(*g, sol.states[i], p.x0, 1e-8);
    if (nodes.size() == 1) {
      ++with_node;
      CHECK(std::abs(nodes[0]) < 2.0 * g->dx());
      // Least middle population of the three.
      for (std::size_t j = 0; j < 3; ++j) {
        if (j != i) {
          CHECK(middle_population(*g, sol.states[i], p.x0) <
                middle_population(*g, sol.states[j], p.x0));
        }
      }
    }
  }
  CHECK(with_node == 1);
}

TEST_CASE("masked potential isolates the chosen well") {
  auto g = default_grid();
  const auto p = PotentialParams::with_pulse(1000.0);
  const auto v = masked_potential(p, *g, Well::left);
  CHECK(v[g->floor_index(0.0)] == p.v_max);
  CHECK(v[g->floor_index(-1.5)] == potential(g->x(g->floor_index(-1.5)), 0.0, p));
  const auto bare = masked_potential(PotentialParams::bare_trap(), *g, Well::left);
  CHECK(bare[g->floor_index(0.0)] == potential(g->x(g->floor_index(0.0)), 0.0, PotentialParams::bare_trap()));
}
