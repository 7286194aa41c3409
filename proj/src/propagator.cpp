#include "sapbohm/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sapbohm/errors.hpp"

namespace sapbohm {
namespace {

// exp(i phi). Per-step phases are small (|phi| <= 0.75 under the dt bound);
// there the truncated series (error < 1e-20) is cheaper than sincos.
struct PhaseSeries {
  double cos_coeff[9];
  double sin_coeff[9];
  constexpr PhaseSeries() : cos_coeff{}, sin_coeff{} {
    for (int k = 1; k <= 9; ++k) {
      cos_coeff[k - 1] = 1.0 / ((2.0 * k - 1.0) * (2.0 * k));
      sin_coeff[k - 1] = 1.0 / ((2.0 * k) * (2.0 * k + 1.0));
    }
  }
};
inline constexpr PhaseSeries kSeries{};

inline cplx unit_phase(double phi) noexcept {
  if (std::abs(phi) > 0.8) return std::polar(1.0, phi);
  const double p2 = phi * phi;
  double c = 1.0;
  double s = 1.0;
  for (int k = 8; k >= 0; --k) {
    c = 1.0 - p2 * kSeries.cos_coeff[k] * c;
    s = 1.0 - p2 * kSeries.sin_coeff[k] * s;
  }
  return {c, phi * s};
}

// exp(i phi) for the mean-field phase; valid for |phi| <= 1e-2 (error < 1e-20).
inline cplx small_phase(double phi) noexcept {
  const double p2 = phi * phi;
  const double c = 1.0 - p2 * (0.5 - p2 * (1.0 / 24.0 - p2 * (1.0 / 720.0)));
  const double s = phi * (1.0 - p2 * (1.0 / 6.0 - p2 * (1.0 / 120.0 - p2 * (1.0 / 5040.0))));
  return {c, s};
}

}  // namespace

std::size_t PropagationConfig::step_count() const {
  const double span = t_end - t_start;
  if (span <= 0.0) return 0;
  return static_cast<std::size_t>(std::llround(span / dt));
}

void PropagationConfig::validate(const PotentialParams& p) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dynamics: dt must be > 0");
  const double vmax = p.barriers ? p.v_max : 0.0;
  if (vmax * dt > 1.5) {
    throw ConfigError("dynamics: dt * V_max = " + std::to_string(vmax * dt) +
                      " exceeds the 1.5 rad phase bound");
  }
  if (snapshot_stride < 1) throw ConfigError("dynamics: snapshot_stride must be >= 1");
  if (!(t_end >= t_start)) throw ConfigError("dynamics: t_end must not precede t_start");
  if (!(g >= 0.0)) throw ConfigError("dynamics: g must be >= 0");
}

// ---------------------------------------------------------------------------
// Split step

SplitStepPropagator::SplitStepPropagator(GridPtr grid, const PotentialParams& p, double g,
                                         double dt)
    : grid_(std::move(grid)),
      params_(p),
      g_(g),
      dt_(dt),
      profile_(*grid_, p),
      fft_(grid_->size()),
      harmonic_phase_(grid_->size()),
      kinetic_phase_(grid_->size()),
      potential_phase_(grid_->size()),
      mean_field_phase_(grid_->size()) {
  const std::size_t n = grid_->size();
  const double scale = 1.0 / static_cast<double>(n);
  const auto& k = grid_->wavenumbers();
  for (std::size_t i = 0; i < n; ++i) {
    harmonic_phase_[i] = std::polar(1.0, -profile_.harmonic[i] * 0.5 * dt_);
    kinetic_phase_[i] = std::polar(scale, -0.5 * k[i] * k[i] * dt_);
  }
  potential_phase_ = harmonic_phase_;
}

void SplitStepPropagator::load(const Wavefunction& psi) {
  if (psi.size() != grid_->size()) throw ConfigError("state does not match the propagator grid");
  std::copy(psi.values.begin(), psi.values.end(), fft_.data().begin());
  t0_ = time_ = psi.time;
  steps_ = 0;
}

Wavefunction SplitStepPropagator::state() const {
  auto d = fft_.data();
  return Wavefunction(grid_, ComplexField(d.begin(), d.end()), time_);
}

void SplitStepPropagator::potential_half_step(std::span<cplx> psi, double t_mid) {
  const auto h = barrier_heights(t_mid, params_);
  // potential_phase_ holds exp(-i V(t_mid) dt/2); only the barrier support
  // changes with time.
  if (h.left != cached_heights_.left || h.right != cached_heights_.right) {
    for (std::size_t i = profile_.barrier_begin; i < profile_.barrier_end; ++i) {
      const double vb = h.left * profile_.left[i] + h.right * profile_.right[i];
      potential_phase_[i] = harmonic_phase_[i] * unit_phase(-vb * 0.5 * dt_);
    }
    cached_heights_ = h;
  }
  const std::size_t n = psi.size();
  if (g_ == 0.0) {
    for (std::size_t i = 0; i < n; ++i) psi[i] *= potential_phase_[i];
    return;
  }
  const double c = -g_ * 0.5 * dt_;
  double largest = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_field_phase_[i] = c * std::norm(psi[i]);
    largest = std::max(largest, -mean_field_phase_[i]);
  }
  if (largest <= 1e-2) {
    for (std::size_t i = 0; i < n; ++i) psi[i] *= potential_phase_[i] * small_phase(mean_field_phase_[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      psi[i] *= potential_phase_[i] * std::polar(1.0, mean_field_phase_[i]);
    }
  }
}

void SplitStepPropagator::step() {
  auto psi = fft_.data();
  const double t_mid = time_ + 0.5 * dt_;
  potential_half_step(psi, t_mid);
  fft_.forward();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= kinetic_phase_[i];
  fft_.backward();
  potential_half_step(psi, t_mid);
  time_ = t0_ + static_cast<double>(++steps_) * dt_;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson

CrankNicolsonPropagator::CrankNicolsonPropagator(GridPtr grid, const PotentialParams& p,
                                                 double g, double dt)
    : grid_(std::move(grid)),
      params_(p),
      profile_(*grid_, p),
      g_(g),
      dt_(dt),
      psi_(grid_->size()),
      v_(grid_->size()),
      v_eff_(grid_->size()),
      rhs_(grid_->size()),
      scratch_(grid_->size()),
      c_prime_(grid_->size()) {}

void CrankNicolsonPropagator::load(const Wavefunction& psi) {
  if (psi.size() != grid_->size()) throw ConfigError("state does not match the propagator grid");
  psi_ = psi.values;
  t0_ = time_ = psi.time;
  steps_ = 0;
}

Wavefunction CrankNicolsonPropagator::state() const { return Wavefunction(grid_, psi_, time_); }

// Solves (1 + i dt/2 H) out = (1 - i dt/2 H) source with H the tridiagonal
// finite-difference Hamiltonian built on v_eff.
void CrankNicolsonPropagator::solve(std::span<const double> v_eff, const ComplexField& source,
                                    ComplexField& out) {
  const std::size_t n = source.size();
  const double dx = grid_->dx();
  const double kin_diag = 1.0 / (dx * dx);
  const double kin_off = -0.5 / (dx * dx);
  const cplx half(0.0, 0.5 * dt_);
  const cplx off = half * kin_off;

  for (std::size_t i = 0; i < n; ++i) {
    const cplx left = i > 0 ? source[i - 1] : cplx(0.0);
    const cplx right = i + 1 < n ? source[i + 1] : cplx(0.0);
    const cplx h_psi = (kin_diag + v_eff[i]) * source[i] + kin_off * (left + right);
    rhs_[i] = source[i] - half * h_psi;
  }

  // Thomas algorithm with constant off-diagonals.
  cplx denom = 1.0 + half * (kin_diag + v_eff[0]);
  c_prime_[0] = off / denom;
  scratch_[0] = rhs_[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = 1.0 + half * (kin_diag + v_eff[i]) - off * c_prime_[i - 1];
    if (std::abs(denom) == 0.0) throw NumericalError("Crank-Nicolson tridiagonal solve failed");
    c_prime_[i] = off / denom;
    scratch_[i] = (rhs_[i] - off * scratch_[i - 1]) / denom;
  }
  out[n - 1] = scratch_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) out[i] = scratch_[i] - c_prime_[i] * out[i + 1];
}

void CrankNicolsonPropagator::step() {
  profile_.evaluate(time_ + 0.5 * dt_, params_, v_);
  if (g_ == 0.0) {
    solve(v_, psi_, psi_);
  } else {
    const std::size_t n = psi_.size();
    ComplexField predicted(n);
    for (std::size_t i = 0; i < n; ++i) v_eff_[i] = v_[i] + g_ * std::norm(psi_[i]);
    solve(v_eff_, psi_, predicted);
    for (std::size_t i = 0; i < n; ++i) {
      v_eff_[i] = v_[i] + 0.5 * g_ * (std::norm(psi_[i]) + std::norm(predicted[i]));
    }
    solve(v_eff_, psi_, psi_);
  }
  time_ = t0_ + static_cast<double>(++steps_) * dt_;
}

// ---------------------------------------------------------------------------

namespace {

void check_finite(std::span<const cplx> v, long long step_index) {
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw PropagationError("non-finite amplitude detected at step " + std::to_string(step_index),
                             step_index);
    }
  }
}

}  // namespace

Wavefunction step(const Wavefunction& psi, const PropagationConfig& cfg, const PotentialParams& p) {
  SplitStepPropagator prop(psi.grid, p, cfg.g, cfg.dt);
  prop.load(psi);
  prop.step();
  check_finite(prop.values(), 1);
  return prop.state();
}

Wavefunction cn_step(const Wavefunction& psi, const PropagationConfig& cfg,
                     const PotentialParams& p) {
  CrankNicolsonPropagator prop(psi.grid, p, cfg.g, cfg.dt);
  prop.load(psi);
  prop.step();
  check_finite(prop.values(), 1);
  return prop.state();
}

double RunRecord::max_norm_drift() const {
  double drift = 0.0;
  for (double n : norms) drift = std::max(drift, std::abs(n - norms.front()));
  return drift;
}

RunRecord propagate(const Wavefunction& psi0, const PropagationConfig& cfg,
                    const PotentialParams& p, std::span<const FrameObserver> observers) {
  cfg.validate(p);
  RunRecord rec;
  rec.grid = psi0.grid;
  SplitStepPropagator prop(psi0.grid, p, cfg.g, cfg.dt);
  Wavefunction start = psi0;
  start.time = cfg.t_start;
  prop.load(start);

  const std::size_t n_steps = cfg.step_count();
  Wavefunction snap(psi0.grid);
  auto record = [&](std::size_t step_index) {
    auto v = prop.values();
    std::copy(v.begin(), v.end(), snap.values.begin());
    snap.time = cfg.t_start + static_cast<double>(step_index) * cfg.dt;
    const double nrm = norm(snap);
    if (!std::isfinite(nrm)) {
      throw PropagationError("non-finite norm detected at step " + std::to_string(step_index),
                             static_cast<long long>(step_index));
    }
    rec.times.push_back(snap.time);
    rec.norms.push_back(nrm);
    rec.populations.push_back(populations(snap, p.x0));
    rec.mean_positions.push_back(mean_position(snap));
    if (cfg.store_frames) rec.frames.push_back(snap);
  };
  auto notify = [&](std::size_t step_index, bool snapshot) {
    if (observers.empty()) return;
    const FrameView view{step_index, cfg.t_start + static_cast<double>(step_index) * cfg.dt,
                         prop.values(), snapshot};
    for (const auto& obs : observers) obs(view);
  };

  record(0);
  notify(0, true);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    prop.step();
    const bool snapshot = (s % cfg.snapshot_stride == 0) || s == n_steps;
    if (snapshot) record(s);
    notify(s, snapshot);
  }
  rec.final_state = prop.state();
  rec.final_state.time = cfg.t_start + static_cast<double>(n_steps) * cfg.dt;
  return rec;
}

double total_energy(const Wavefunction& psi, const PotentialParams& p, double t, double g) {
  const Grid& grid = *psi.grid;
  const auto d = gradient(psi);
  double kin = 0.0;
  double pot = 0.0;
  double inter = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    kin += 0.5 * std::norm(d[i]);
    pot += potential(grid.x(i), t, p) * rho;
    inter += rho * rho;
  }
  return grid.dx() * (kin + pot + 0.5 * g * inter);
}

}  // namespace sapbohm
