#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sapbohm/grid.hpp"
#include "sapbohm/potential.hpp"
#include "sapbohm/spectral.hpp"

namespace sapbohm {

struct PropagationConfig {
  double dt = 5e-4;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t snapshot_stride = 100;
  double g = 0.0;
  // Keep a copy of the wavefunction at every snapshot in the RunRecord.
  bool store_frames = false;

  std::size_t step_count() const;
  // dt > 0, dt * V_max <= 1.5 rad per potential half step, stride >= 1.
  void validate(const PotentialParams& p) const;
};

// Strang-split propagator for
//   i d_t psi = [-1/2 d_x^2 + V(x, t) + g |psi|^2] psi
// One step: exp(-i (V(t + dt/2) + g|psi|^2) dt/2), exact kinetic step in
// Fourier space, then the closing half potential step with the updated
// density. The state lives in the FFT buffer between steps.
class SplitStepPropagator {
 public:
  SplitStepPropagator(GridPtr grid, const PotentialParams& p, double g, double dt);

  void load(const Wavefunction& psi);
  Wavefunction state() const;
  std::span<const cplx> values() const noexcept { return fft_.data(); }
  double time() const noexcept { return time_; }
  const Grid& grid() const noexcept { return *grid_; }
  double dt() const noexcept { return dt_; }

  void step();

 private:
  void potential_half_step(std::span<cplx> psi, double t_mid);

  GridPtr grid_;
  PotentialParams params_;
  double g_;
  double dt_;
  double t0_ = 0.0;
  std::size_t steps_ = 0;
  double time_ = 0.0;
  PotentialProfile profile_;
  FftWorkspace fft_;
  ComplexField harmonic_phase_;
  ComplexField kinetic_phase_;
  ComplexField potential_phase_;
  RealField mean_field_phase_;
  BarrierHeights cached_heights_{-1.0, -1.0};
};

// Crank-Nicolson finite-difference propagator (second order in dt and dx) used
// as an independent check of SplitStepPropagator. Dirichlet boundaries; the
// nonlinear term is treated with one predictor-corrector pass.
class CrankNicolsonPropagator {
 public:
  CrankNicolsonPropagator(GridPtr grid, const PotentialParams& p, double g, double dt);

  void load(const Wavefunction& psi);
  Wavefunction state() const;
  std::span<const cplx> values() const noexcept { return psi_; }
  double time() const noexcept { return time_; }

  void step();

 private:
  void solve(std::span<const double> v_eff, const ComplexField& rhs_source, ComplexField& out);

  GridPtr grid_;
  PotentialParams params_;
  PotentialProfile profile_;
  double g_;
  double dt_;
  double t0_ = 0.0;
  std::size_t steps_ = 0;
  double time_ = 0.0;
  ComplexField psi_;
  RealField v_;
  RealField v_eff_;
  ComplexField rhs_;
  ComplexField scratch_;
  ComplexField c_prime_;
};

// Single step from psi at time psi.time; returns the state at psi.time + dt.
Wavefunction step(const Wavefunction& psi, const PropagationConfig& cfg, const PotentialParams& p);
Wavefunction cn_step(const Wavefunction& psi, const PropagationConfig& cfg,
                     const PotentialParams& p);

// Called once for the initial state (step 0) and after every step.
struct FrameView {
  std::size_t step_index;
  double time;
  std::span<const cplx> values;
  bool snapshot;  // true on snapshot_stride multiples and on the final step
};
using FrameObserver = std::function<void(const FrameView&)>;

struct RunRecord {
  GridPtr grid;
  std::vector<double> times;
  std::vector<Populations> populations;
  std::vector<double> mean_positions;
  std::vector<double> norms;
  std::vector<Wavefunction> frames;  // only with store_frames
  Wavefunction final_state;

  double max_norm_drift() const;
};

// Propagates psi0 from cfg.t_start to cfg.t_end. Observables are stored every
// snapshot_stride steps and at the end; observers see every step.
RunRecord propagate(const Wavefunction& psi0, const PropagationConfig& cfg,
                    const PotentialParams& p, std::span<const FrameObserver> observers = {});

// Total energy <H> at time t (spectral kinetic term).
double total_energy(const Wavefunction& psi, const PotentialParams& p, double t, double g);

}  // namespace sapbohm
