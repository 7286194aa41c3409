#include "sapbohm/stationary.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "sapbohm/errors.hpp"
#include "sapbohm/spectral.hpp"

namespace sapbohm {

RealField masked_potential(const PotentialParams& p, const Grid& grid, Well well) {
  RealField v = schedule_snapshot(0.0, p, grid);
  if (!p.barriers) return v;
  const double edge = p.x0 - p.sigma;
  const double outer = p.x0 + p.sigma;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    bool outside = false;
    switch (well) {
      case Well::left: outside = x > -edge; break;
      case Well::right: outside = x < edge; break;
      case Well::middle: outside = x < -outer || x > outer; break;
    }
    if (outside) v[i] = p.v_max;
  }
  return v;
}

EnergyTerms energy_terms(const Wavefunction& psi, std::span<const double> v) {
  const auto d = gradient(psi);
  EnergyTerms e;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    e.kinetic += 0.5 * std::norm(d[i]);
    e.potential += v[i] * rho;
    e.interaction += rho * rho;
  }
  const double dx = psi.grid->dx();
  e.kinetic *= dx;
  e.potential *= dx;
  e.interaction *= dx;
  return e;
}

GroundState ground_state(const PotentialParams& p, GridPtr grid, Well well, double g,
                         const ImaginaryTimeOptions& options) {
  p.validate();
  if (!(g >= 0.0)) throw ConfigError("ground state: g must be >= 0");
  if (!(options.dtau > 0.0) || options.check_interval == 0) {
    throw ConfigError("ground state: dtau and check_interval must be positive");
  }
  const Grid& gr = *grid;
  const std::size_t n = gr.size();
  const RealField v = masked_potential(p, gr, well);

  // Start from a Gaussian at the bottom of the selected well.
  const auto min_it = std::min_element(v.begin(), v.end());
  const double center = gr.x(static_cast<std::size_t>(min_it - v.begin()));
  Wavefunction psi = gaussian(grid, center, 0.3);

  const double dtau = options.dtau;
  RealField pot_factor(n);
  ComplexField kin_factor(n);
  const auto& k = gr.wavenumbers();
  for (std::size_t i = 0; i < n; ++i) {
    pot_factor[i] = std::exp(-0.5 * dtau * v[i]);
    kin_factor[i] = std::exp(-0.5 * k[i] * k[i] * dtau) / static_cast<double>(n);
  }

  FftWorkspace fft(n);
  auto buf = fft.data();
  std::copy(psi.values.begin(), psi.values.end(), buf.begin());
  auto half = [&] {
    if (g == 0.0) {
      for (std::size_t i = 0; i < n; ++i) buf[i] *= pot_factor[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        buf[i] *= pot_factor[i] * std::exp(-0.5 * dtau * g * std::norm(buf[i]));
      }
    }
  };
  auto renormalize = [&] {
    double s = 0.0;
    for (const auto& z : buf) s += std::norm(z);
    const double f = 1.0 / std::sqrt(s * gr.dx());
    for (auto& z : buf) z *= f;
  };

  GroundState out;
  double previous = std::numeric_limits<double>::quiet_NaN();
  double energy = previous;
  std::size_t step = 0;
  bool converged = false;
  while (step < options.max_steps) {
    for (std::size_t s = 0; s < options.check_interval; ++s) {
      half();
      fft.forward();
      for (std::size_t i = 0; i < n; ++i) buf[i] *= kin_factor[i];
      fft.backward();
      half();
      renormalize();
    }
    step += options.check_interval;
    std::copy(buf.begin(), buf.end(), psi.values.begin());
    energy = energy_terms(psi, v).energy(g);
    if (!std::isfinite(energy)) {
      throw PreparationError("imaginary-time relaxation produced a non-finite energy at step " +
                             std::to_string(step));
    }
    if (options.record_history) out.energy_history.push_back(energy);
    if (std::isfinite(previous) &&
        std::abs(energy - previous) <= options.tolerance * std::abs(energy)) {
      converged = true;
      break;
    }
    previous = energy;
  }
  if (!converged) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "imaginary-time relaxation did not converge after " << step
        << " steps: last energy " << energy << ", previous " << previous
        << ", relative change " << std::abs(energy - previous) / std::abs(energy)
        << " (tolerance " << options.tolerance << ")";
    throw PreparationError(msg.str());
  }
  psi.time = 0.0;
  const auto terms = energy_terms(psi, v);
  out.psi = std::move(psi);
  out.energy = terms.energy(g);
  out.chemical_potential = terms.chemical_potential(g);
  out.steps = step;
  return out;
}

// ---------------------------------------------------------------------------

Wavefunction EigenSolution::state(std::size_t i) const {
  Wavefunction psi(grid);
  std::transform(states[i].begin(), states[i].end(), psi.values.begin(),
                 [](double v) { return cplx(v, 0.0); });
  return psi;
}

EigenSolution eigenstates(const PotentialParams& p, double t, GridPtr grid, std::size_t n) {
  const RealField v = schedule_snapshot(t, p, *grid);
  return eigenstates(v, std::move(grid), n);
}

EigenSolution eigenstates(std::span<const double> v, GridPtr grid, std::size_t n) {
  if (n == 0 || n > 10) throw ConfigError("eigenstates: n must be in [1, 10]");
  const std::size_t size = grid->size();
  const double dx = grid->dx();
  const double diag_kin = 1.0 / (dx * dx);
  const double off = -0.5 / (dx * dx);

  std::vector<double> d(size), e(size, off);
  for (std::size_t i = 0; i < size; ++i) d[i] = diag_kin + v[i];
  std::vector<double> w(size), z(size * n);
  std::vector<lapack_int> support(2 * n);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, 'V', 'I', static_cast<lapack_int>(size), d.data(), e.data(), 0.0, 0.0, 1,
      static_cast<lapack_int>(n), 0.0, &found, w.data(), z.data(), static_cast<lapack_int>(size),
      support.data());
  if (info != 0 || found != static_cast<lapack_int>(n)) {
    throw NumericalError("eigenstates: dstevr failed (info " + std::to_string(info) + ", found " +
                         std::to_string(found) + ")");
  }

  EigenSolution sol;
  sol.grid = grid;
  const double scale = 1.0 / std::sqrt(dx);
  for (std::size_t j = 0; j < n; ++j) {
    RealField phi(z.begin() + static_cast<std::ptrdiff_t>(j * size),
                  z.begin() + static_cast<std::ptrdiff_t>((j + 1) * size));
    const auto peak = std::max_element(phi.begin(), phi.end(),
                                       [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double sign = *peak < 0.0 ? -1.0 : 1.0;
    for (auto& x : phi) x *= sign * scale;

    double res = 0.0;
    double nrm = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      const double left = i > 0 ? phi[i - 1] : 0.0;
      const double right = i + 1 < size ? phi[i + 1] : 0.0;
      const double h = (diag_kin + v[i]) * phi[i] + off * (left + right);
      const double r = h - w[j] * phi[i];
      res += r * r;
      nrm += phi[i] * phi[i];
    }
    sol.max_residual = std::max(sol.max_residual, std::sqrt(res / nrm) / std::max(1.0, std::abs(w[j])));
    sol.energies.push_back(w[j]);
    sol.states.push_back(std::move(phi));
  }
  return sol;
}

double middle_population(const Grid& grid, std::span<const double> state, double x0) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid.x(i)) <= x0) s += state[i] * state[i];
  }
  return s * grid.dx();
}

std::vector<double> interior_nodes(const Grid& grid, std::span<const double> state, double x0,
                                   double cutoff) {
  std::vector<double> nodes;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double xa = grid.x(i);
    const double xb = grid.x(i + 1);
    if (xa <= -x0 || xb >= x0) continue;
    const double a = state[i];
    const double b = state[i + 1];
    if (std::max(std::abs(a), std::abs(b)) <= cutoff) continue;
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
      if (b == 0.0) continue;  // counted in the next interval
      nodes.push_back(xa + (xb - xa) * a / (a - b));
    }
  }
  return nodes;
}

RealField ThreeModeModel::dark_state() const {
  // Null vector of the middle row of the projected Hamiltonian; reduces to
  // cos(theta)|L> - sin(theta)|R> for negative couplings.
  const double h_ml = hamiltonian[3];
  const double h_mr = hamiltonian[5];
  const double r = std::hypot(h_ml, h_mr);
  const double cl = r > 0.0 ? h_mr / r : 1.0;
  const double cr = r > 0.0 ? -h_ml / r : 0.0;
  RealField d(modes[0].size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = cl * modes[0][i] + cr * modes[2][i];
  // Keep the left lobe positive.
  if (cl < 0.0) {
    for (auto& x : d) x = -x;
  }
  return d;
}

ThreeModeModel three_mode_extract(const EigenSolution& sol, double x0) {
  if (sol.size() < 3) throw AnalysisError("three-mode extraction needs at least three eigenstates");
  if (sol.size() >= 4) {
    const double width = sol.energies[2] - sol.energies[0];
    const double gap = sol.energies[3] - sol.energies[2];
    if (!(gap > 1e-3 * std::max(width, 1e-12))) {
      throw AnalysisError("three-mode extraction: the lowest three states are not separated from the fourth");
    }
  }
  const Grid& grid = *sol.grid;
  const double dx = grid.dx();

  std::array<double, 9> xm{};
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        s += sol.states[a][i] * grid.x(i) * sol.states[b][i];
      }
      xm[a * 3 + b] = xm[b * 3 + a] = s * dx;
    }
  }
  std::array<double, 3> eig{};
  if (LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'V', 'U', 3, xm.data(), 3, eig.data()) != 0) {
    throw NumericalError("three-mode extraction: position-operator diagonalization failed");
  }
  // xm now holds eigenvectors in columns, ordered by ascending <x>: L, M, R.

  ThreeModeModel model;
  for (int m = 0; m < 3; ++m) {
    RealField mode(grid.size(), 0.0);
    for (int a = 0; a < 3; ++a) {
      const double c = xm[a * 3 + m];
      for (std::size_t i = 0; i < grid.size(); ++i) mode[i] += c * sol.states[a][i];
    }
    const double total = std::accumulate(mode.begin(), mode.end(), 0.0);
    if (total < 0.0) {
      for (auto& x : mode) x = -x;
      for (int a = 0; a < 3; ++a) xm[a * 3 + m] = -xm[a * 3 + m];
    }
    double inside = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double x = grid.x(i);
      const bool own = m == 0 ? x < -x0 : (m == 1 ? std::abs(x) <= x0 : x > x0);
      if (own) inside += mode[i] * mode[i];
    }
    model.localization[m] = inside * dx;
    model.modes[m] = std::move(mode);
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += xm[i * 3 + a] * sol.energies[i] * xm[i * 3 + b];
      model.hamiltonian[a * 3 + b] = s;
    }
  }
  if (model.localization[0] < 0.5 || model.localization[2] < 0.5) {
    std::ostringstream msg;
    msg << "three-mode extraction: outer modes are not localized (L " << model.localization[0]
        << ", R " << model.localization[2] << "); the lowest three states do not form a "
        << "separated three-well manifold";
    throw AnalysisError(msg.str());
  }
  model.omega1 = 2.0 * std::abs(model.hamiltonian[1]);
  model.omega2 = 2.0 * std::abs(model.hamiltonian[5]);
  model.theta = std::atan2(model.omega1, model.omega2);
  return model;
}

}  // namespace sapbohm
