#include "sapbohm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sapbohm/bohm.hpp"
#include "sapbohm/errors.hpp"
#include "sapbohm/spectral.hpp"

namespace sapbohm {

namespace {

struct Argmin {
  std::size_t index;
  std::size_t first;
  std::size_t last;
};

std::optional<Argmin> central_argmin(const Grid& grid, std::span<const cplx> values, double x0) {
  const std::size_t first = grid.floor_index(-x0) + 1;
  const std::size_t last = grid.floor_index(x0);  // x_last <= x0
  if (last <= first + 1) return std::nullopt;
  std::size_t best = first;
  double best_rho = std::norm(values[first]);
  for (std::size_t i = first + 1; i <= last; ++i) {
    const double rho = std::norm(values[i]);
    if (rho < best_rho) {
      best_rho = rho;
      best = i;
    }
  }
  return Argmin{best, first, last};
}

double refine(const Grid& grid, std::span<const cplx> values, std::size_t best) {
  const double ym = std::norm(values[best - 1]);
  const double y0 = std::norm(values[best]);
  const double yp = std::norm(values[best + 1]);
  const double curvature = ym - 2.0 * y0 + yp;
  double shift = 0.0;
  if (curvature > 0.0) shift = 0.5 * (ym - yp) / curvature;
  return grid.x(best) + shift * grid.dx();
}

}  // namespace

std::optional<double> locate_node(const Grid& grid, std::span<const cplx> values, double x0) {
  const auto m = central_argmin(grid, values, x0);
  if (!m || m->index == m->first || m->index == m->last) return std::nullopt;
  return refine(grid, values, m->index);
}

NodePoint node_point(const Grid& grid, std::span<const cplx> values, double x0) {
  const auto m = central_argmin(grid, values, x0);
  if (!m) throw AnalysisError("central region narrower than three grid points");
  if (m->index == m->first) return {-x0, false};
  if (m->index == m->last) return {x0, false};
  return {refine(grid, values, m->index), true};
}

bool in_track_window(double t, const PotentialParams& p, double barrier_fraction) noexcept {
  if (!p.barriers) return false;
  const auto h = barrier_heights(t, p);
  const double limit = barrier_fraction * p.v_max;
  return h.left < limit && h.right < limit;
}

double NodeTrack::max_density() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (i >= interior.size() || interior[i]) m = std::max(m, densities[i]);
  }
  return m;
}

NodeTracker::NodeTracker(GridPtr grid, PotentialParams params, double sample_dt,
                         double barrier_fraction)
    : grid_(std::move(grid)),
      params_(params),
      sample_dt_(sample_dt),
      barrier_fraction_(barrier_fraction) {
  track_.sample_dt = sample_dt;
}

std::optional<NodePoint> NodeTracker::locate(double t, std::span<const cplx> values) const {
  if (!in_track_window(t, params_, barrier_fraction_)) return std::nullopt;
  return node_point(*grid_, values, params_.x0);
}

bool NodeTracker::add(double t, std::span<const cplx> values) {
  const auto xn = locate(t, values);
  if (!xn) return false;
  const auto f = sample_field(*grid_, values, xn->position);
  if (!track_.times.empty() && t - track_.times.back() > 1.5 * sample_dt_) {
    track_.gaps.push_back(track_.times.back());
  }
  track_.times.push_back(t);
  track_.positions.push_back(xn->position);
  track_.interior.push_back(xn->interior);
  track_.densities.push_back(f.density);
  track_.currents.push_back(f.current);
  return true;
}

NodeTrack NodeTracker::finish(std::size_t smoothing_window) const {
  NodeTrack out = track_;
  out.velocities = smoothed_node_velocity(out, smoothing_window);
  return out;
}

NodeTrack track_node(const RunRecord& record, const PotentialParams& p,
                     std::size_t smoothing_window, double barrier_fraction) {
  if (record.frames.empty()) throw AnalysisError("node tracking needs stored frames");
  const double dt = record.frames.size() > 1 ? record.frames[1].time - record.frames[0].time : 0.0;
  NodeTracker tracker(record.grid, p, dt, barrier_fraction);
  for (const auto& f : record.frames) tracker.add(f.time, f.values);
  return tracker.finish(smoothing_window);
}

namespace {

// [begin, end) index ranges of gap-free stretches of the track.
std::vector<std::pair<std::size_t, std::size_t>> segments(const NodeTrack& track) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t n = track.size();
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    const bool split =
        i == n || (track.sample_dt > 0.0 && track.times[i] - track.times[i - 1] > 1.5 * track.sample_dt);
    if (split) {
      if (i > begin) out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

}  // namespace

std::vector<double> smoothed_node_velocity(const NodeTrack& track, std::size_t window) {
  const std::size_t n = track.size();
  std::vector<double> raw(n, 0.0);
  std::vector<double> out(n, 0.0);
  const std::size_t half = window / 2;
  for (const auto& [b, e] : segments(track)) {
    if (e - b < 2) continue;
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t lo = i == b ? i : i - 1;
      const std::size_t hi = i + 1 == e ? i : i + 1;
      raw[i] = (track.positions[hi] - track.positions[lo]) / (track.times[hi] - track.times[lo]);
    }
    for (std::size_t i = b; i < e; ++i) {
      const std::size_t lo = i >= b + half ? i - half : b;
      const std::size_t hi = std::min(e - 1, i + half);
      double s = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) s += raw[j];
      out[i] = s / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

double node_flux(const NodeTrack& track) {
  double flux = 0.0;
  for (const auto& [b, e] : segments(track)) {
    for (std::size_t i = b + 1; i < e; ++i) {
      flux += 0.5 * (track.currents[i] + track.currents[i - 1]) * (track.times[i] - track.times[i - 1]);
    }
  }
  return flux;
}

VmaxIntegral vmax_integral(const NodeTrack& track) {
  VmaxIntegral out;
  const auto vel = track.velocities.size() == track.size() ? track.velocities
                                                            : smoothed_node_velocity(track, 11);
  double covered = 0.0;
  for (const auto& [b, e] : segments(track)) {
    for (std::size_t i = b + 1; i < e; ++i) {
      const double dt = track.times[i] - track.times[i - 1];
      auto first = [&](std::size_t j) {
        return track.currents[j] * track.currents[j] / track.densities[j];
      };
      auto second = [&](std::size_t j) { return track.currents[j] * vel[j]; };
      out.first_term += 0.5 * (first(i) + first(i - 1)) * dt;
      out.second_term += 0.5 * (second(i) + second(i - 1)) * dt;
      covered += dt;
    }
  }
  out.total = out.first_term - out.second_term;
  const double span = track.end_time() - track.begin_time();
  out.coverage = span > 0.0 ? covered / span : 0.0;
  return out;
}

std::vector<double> continuity_residual(std::span<const Wavefunction> frames) {
  std::vector<double> out;
  if (frames.size() < 2) return out;
  const Grid& grid = *frames.front().grid;
  const std::size_t n = grid.size();
  RealField j_prev = current(frames.front());
  for (std::size_t f = 1; f < frames.size(); ++f) {
    const auto& a = frames[f - 1];
    const auto& b = frames[f];
    const double dt = b.time - a.time;
    if (!(dt > 0.0)) throw AnalysisError("continuity residual needs strictly increasing frame times");
    RealField j_next = current(b);
    ComplexField jm(n);
    for (std::size_t i = 0; i < n; ++i) jm[i] = 0.5 * (j_prev[i] + j_next[i]);
    const auto div = spectral_derivative(grid, jm, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = (std::norm(b.values[i]) - std::norm(a.values[i])) / dt + div[i].real();
      s += r * r;
    }
    out.push_back(std::sqrt(s * grid.dx()));
    j_prev = std::move(j_next);
  }
  return out;
}

QuantumPotential quantum_potential(const Wavefunction& psi, double density_floor) {
  const auto d1 = gradient(psi);
  const auto d2 = laplacian(psi);
  QuantumPotential q{RealField(psi.size(), 0.0), std::vector<bool>(psi.size(), false)};
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi.values[i]);
    if (!(rho > density_floor)) continue;
    const double v = std::imag(std::conj(psi.values[i]) * d1[i]) / rho;
    const double curvature = std::real(std::conj(psi.values[i]) * d2[i]) / rho + v * v;
    q.values[i] = -0.5 * curvature;
    q.valid[i] = true;
  }
  return q;
}

PowerLawFit fit_powerlaw(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw AnalysisError("power-law fit: x and y differ in length");
  if (x.size() < 3) throw AnalysisError("power-law fit needs at least three points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw AnalysisError("power-law fit needs positive finite data");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw AnalysisError("power-law fit needs at least two distinct x values");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + fit.exponent * lx[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

}  // namespace sapbohm
