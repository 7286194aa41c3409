#include <doctest.h>

#include <cmath>

#include "sapbohm/errors.hpp"
#include "sapbohm/potential.hpp"

using namespace sapbohm;

TEST_CASE("barrier_height pulse values") {
  const auto p = PotentialParams::with_pulse(5000.0);
  CHECK(barrier_height(0.0, 0.0, p) == 1000.0);
  CHECK(barrier_height(2500.0, 0.0, p) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(barrier_height(1250.0, 0.0, p) == doctest::Approx(67.1875).epsilon(1e-14));
  CHECK(barrier_height(-3.0, 0.0, p) == 1000.0);
  CHECK(barrier_height(6000.0, 0.0, p) == 1000.0);
  // The left barrier is the right one delayed by t_d.
  CHECK(barrier_height(1250.0 + 750.0, 750.0, p) == doctest::Approx(67.1875).epsilon(1e-14));
}

TEST_CASE("barrier_height is bounded and continuous") {
  const auto p = PotentialParams::with_pulse(1000.0);
  double prev = barrier_height(-1.0, 0.0, p);
  for (double t = -1.0; t <= 1001.0; t += 0.01) {
    const double h = barrier_height(t, 0.0, p);
    CHECK(h >= p.v_min);
    CHECK(h <= p.v_max);
    CHECK(std::abs(h - prev) < 0.5);
    prev = h;
  }
}

TEST_CASE("potential reference values") {
  const auto p = PotentialParams::with_pulse(5000.0);
  CHECK(potential(0.0, 0.0, p) == doctest::Approx(2000.0 * std::exp(-4.5)).epsilon(1e-13));
  CHECK(potential(0.0, -10.0, p) == doctest::Approx(22.2178).epsilon(1e-5));
  const double edge = 0.48 * 0.48 / 2 + 1000.0 + 1000.0 * std::exp(-18.0);
  CHECK(potential(0.48, 0.0, p) == doctest::Approx(edge).epsilon(1e-13));
  CHECK(potential(-0.48, 0.0, p) == doctest::Approx(edge).epsilon(1e-13));
  CHECK(potential(0.48, 0.0, p) == doctest::Approx(1000.115).epsilon(1e-6));
  for (double t : {0.0, 1000.0, 2700.0}) CHECK(std::abs(potential(5.0, t, p) - 12.5) < 1e-3);
}

TEST_CASE("counter-intuitive ordering: the right barrier drops first") {
  const auto p = PotentialParams::with_pulse(5000.0);
  const auto h = barrier_heights(500.0, p);
  CHECK(h.right < p.v_max);
  CHECK(h.left == p.v_max);
  CHECK(p.total_time() == doctest::Approx(5750.0));
}

TEST_CASE("mirror symmetry under t -> T - t") {
  const auto p = PotentialParams::with_pulse(2000.0);
  const double T = p.total_time();
  for (double t : {0.0, 123.0, 700.0, 1150.0, 1999.0, 2300.0}) {
    for (double x : {-1.3, -0.48, -0.1, 0.0, 0.33, 0.9}) {
      CHECK(potential(x, t, p) == doctest::Approx(potential(-x, T - t, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("potential is frozen outside [0, T]") {
  const auto p = PotentialParams::with_pulse(1000.0);
  for (double x : {-0.7, 0.0, 0.2, 1.1}) {
    CHECK(potential(x, -5.0, p) == potential(x, 0.0, p));
    CHECK(potential(x, p.total_time() + 7.0, p) == potential(x, p.total_time(), p));
  }
}

TEST_CASE("schedule_snapshot matches the scalar potential exactly") {
  const auto p = PotentialParams::with_pulse(5000.0);
  auto g = make_grid(-12.0, 12.0, 2048);
  for (double t : {0.0, 1000.0, 2875.0, 5750.0}) {
    const auto v = schedule_snapshot(t, p, *g);
    for (std::size_t i = 0; i < g->size(); ++i) REQUIRE(v[i] == potential(g->x(i), t, p));
  }
  CHECK(schedule_snapshot(0.0, p, *g) == schedule_snapshot(p.total_time(), p, *g));

  // With both barriers low the middle-region minimum sits near the centre.
  const double t_sym = 0.5 * (p.t_p + p.t_d);
  const auto v = schedule_snapshot(t_sym, p, *g);
  std::size_t best = g->floor_index(-0.48) + 1;
  for (std::size_t i = best; g->x(i) < 0.48; ++i) {
    if (v[i] < v[best]) best = i;
  }
  CHECK(std::abs(g->x(best)) < 0.1);
}

TEST_CASE("parameter validation") {
  auto p = PotentialParams::with_pulse(1000.0);
  CHECK_NOTHROW(p.validate());
  auto bad = p;
  bad.t_p = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.v_min = 2000.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = p;
  bad.t_d = bad.t_p;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_NOTHROW(PotentialParams::bare_trap().validate());
  CHECK(potential(1.0, 3.0, PotentialParams::bare_trap()) == 0.5);
}
