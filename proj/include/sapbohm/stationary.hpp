#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "sapbohm/grid.hpp"
#include "sapbohm/potential.hpp"

namespace sapbohm {

enum class Well { left, middle, right };

struct ImaginaryTimeOptions {
  double dtau = 1e-3;
  // Relative change of the energy between checks, one check every check_interval steps.
  double tolerance = 1e-10;
  std::size_t check_interval = 100;
  std::size_t max_steps = 2'000'000;
  // Record the energy at every check (used for monotonicity diagnostics).
  bool record_history = false;
};

struct GroundState {
  Wavefunction psi;
  // Gross-Pitaevskii energy functional: kinetic + potential + g/2 int |psi|^4.
  double energy = 0.0;
  // Chemical potential: kinetic + potential + g int |psi|^4.
  double chemical_potential = 0.0;
  std::size_t steps = 0;
  std::vector<double> energy_history;
};

// Potential used to isolate one well at t = 0: outside the chosen well, past
// the adjacent barrier peak by one barrier width, the potential is raised to
// V_max. The bare trap is returned unchanged.
RealField masked_potential(const PotentialParams& p, const Grid& grid, Well well);

// Imaginary-time split-step relaxation with renormalization after every step.
// Throws PreparationError if the energy has not settled within max_steps.
GroundState ground_state(const PotentialParams& p, GridPtr grid, Well well, double g,
                         const ImaginaryTimeOptions& options = {});

// Energy and chemical potential of psi in the given static potential.
struct EnergyTerms {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;  // int |psi|^4 (not yet multiplied by g)
  double energy(double g) const noexcept { return kinetic + potential + 0.5 * g * interaction; }
  double chemical_potential(double g) const noexcept {
    return kinetic + potential + g * interaction;
  }
};
EnergyTerms energy_terms(const Wavefunction& psi, std::span<const double> v);

struct EigenSolution {
  GridPtr grid;
  std::vector<double> energies;   // ascending
  std::vector<RealField> states;  // orthonormal with respect to dx * sum
  // Largest relative residual |H phi - E phi| / |phi| over the returned pairs.
  double max_residual = 0.0;

  std::size_t size() const noexcept { return energies.size(); }
  Wavefunction state(std::size_t i) const;
};

// Lowest n eigenpairs (n <= 10) of the second-order finite-difference
// Hamiltonian -1/2 d^2/dx^2 + V(x, t) with V frozen at time t.
EigenSolution eigenstates(const PotentialParams& p, double t, GridPtr grid, std::size_t n);
EigenSolution eigenstates(std::span<const double> v, GridPtr grid, std::size_t n);

// Three-level reduction of the lowest three eigenstates.
struct ThreeModeModel {
  double omega1 = 0.0;  // left-middle tunneling rate
  double omega2 = 0.0;  // middle-right tunneling rate
  double theta = 0.0;   // atan2(omega1, omega2)
  // Projected Hamiltonian in the localized (L, M, R) basis, row major.
  std::array<double, 9> hamiltonian{};
  // Localized basis states |L>, |M>, |R>.
  std::array<RealField, 3> modes;
  // Fraction of each mode's weight inside its own region.
  std::array<double, 3> localization{};

  // cos(theta)|L> - sin(theta)|R>
  RealField dark_state() const;
};

// The localized modes are the eigenvectors of the position operator restricted
// to the three-state manifold, ordered left to right. The couplings are
// Omega_1 = 2|H_LM| and Omega_2 = 2|H_MR|. Throws AnalysisError when the
// manifold is not separated from the rest of the spectrum.
ThreeModeModel three_mode_extract(const EigenSolution& sol, double x0);

// Population of a real state in [-x0, x0].
double middle_population(const Grid& grid, std::span<const double> state, double x0);
// Sign changes of a real state inside (-x0, x0), refined by linear
// interpolation; entries where |state| is below cutoff are ignored.
std::vector<double> interior_nodes(const Grid& grid, std::span<const double> state, double x0,
                                   double cutoff = 0.0);

}  // namespace sapbohm
