#include "sapbohm/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "sapbohm/errors.hpp"

namespace sapbohm {

RealField cumulative_density(const Wavefunction& psi) {
  const std::size_t n = psi.size();
  const double dx = psi.grid->dx();
  RealField cdf(n, 0.0);
  double prev = std::norm(psi.values[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = std::norm(psi.values[i]);
    cdf[i] = cdf[i - 1] + 0.5 * dx * (prev + cur);
    prev = cur;
  }
  const double total = cdf.back();
  if (total > 0.0) {
    for (auto& c : cdf) c /= total;
  }
  return cdf;
}

double cdf_at(const Grid& grid, std::span<const double> cdf, double x) noexcept {
  if (x <= grid.x_min()) return 0.0;
  const std::size_t i = grid.floor_index(x);
  if (i + 1 >= grid.size()) return 1.0;
  const double w = (x - grid.x(i)) / grid.dx();
  return cdf[i] + w * (cdf[i + 1] - cdf[i]);
}

std::vector<double> sample_initial(const Wavefunction& psi0, std::size_t n) {
  if (n < 2) throw ConfigError("trajectory count must be at least 2");
  const double nrm = norm(psi0);
  if (std::abs(nrm - 1.0) > 1e-6) {
    throw ConfigError("initial state must be normalized (norm " + std::to_string(nrm) + ")");
  }
  const Grid& grid = *psi0.grid;
  const auto cdf = cumulative_density(psi0);
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
    const std::size_t lo = hi - 1;
    const double w = (u - cdf[lo]) / (cdf[hi] - cdf[lo]);
    x[k] = grid.x(lo) + w * grid.dx();
  }
  return x;
}

double ks_distance(const Grid& grid, std::span<const double> cdf, std::span<const double> sorted) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double f = cdf_at(grid, cdf, sorted[k]);
    d = std::max({d, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
  }
  return d;
}

LocalAmplitude interpolate_amplitude(const Grid& grid, std::span<const cplx> values,
                                     double x) noexcept {
  const std::size_t i = grid.floor_index(x);
  const double s = (x - grid.x(i)) / grid.dx();
  const double s2 = s * s;
  const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
  const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
  const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
  const double dm = -(3.0 * s2 - 6.0 * s + 2.0) / 6.0;
  const double d0 = (3.0 * s2 - 4.0 * s - 1.0) / 2.0;
  const double d1 = -(3.0 * s2 - 2.0 * s - 2.0) / 2.0;
  const double d2 = (3.0 * s2 - 1.0) / 6.0;
  const cplx a = values[i - 1];
  const cplx b = values[i];
  const cplx c = values[i + 1];
  const cplx e = values[i + 2];
  return {wm * a + w0 * b + w1 * c + w2 * e, (dm * a + d0 * b + d1 * c + d2 * e) / grid.dx()};
}

FieldSample sample_field(const Grid& grid, std::span<const cplx> values, double x) noexcept {
  const auto amp = interpolate_amplitude(grid, values, x);
  FieldSample f;
  f.density = std::norm(amp.value);
  f.current = std::imag(std::conj(amp.value) * amp.slope);
  f.velocity = f.current / f.density;
  return f;
}

// ---------------------------------------------------------------------------

FrameWindow::FrameWindow(GridPtr grid, double frame_dt, std::size_t capacity)
    : grid_(std::move(grid)),
      dt_(frame_dt),
      capacity_(capacity),
      data_(capacity * grid_->size()),
      nodes_(capacity, kNoNode) {}

void FrameWindow::clear() noexcept { count_ = 0; }

void FrameWindow::roll() noexcept {
  if (count_ <= 1) return;
  const std::size_t n = grid_->size();
  const std::size_t last = count_ - 1;
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(last * n), n, data_.begin());
  nodes_[0] = nodes_[last];
  t0_ += static_cast<double>(last) * dt_;
  count_ = 1;
}

void FrameWindow::push(double t, std::span<const cplx> values, double node) {
  if (count_ == capacity_) throw ConfigError("frame window capacity exceeded");
  if (count_ == 0) t0_ = t;
  std::copy(values.begin(), values.end(),
            data_.begin() + static_cast<std::ptrdiff_t>(count_ * grid_->size()));
  nodes_[count_] = node;
  ++count_;
}

double FrameWindow::end_time() const noexcept {
  return t0_ + static_cast<double>(count_ == 0 ? 0 : count_ - 1) * dt_;
}

std::span<const cplx> FrameWindow::frame(std::size_t j) const noexcept {
  return {data_.data() + j * grid_->size(), grid_->size()};
}

std::size_t FrameWindow::bracket(double t, double& weight) const noexcept {
  if (count_ <= 1) {
    weight = 0.0;
    return 0;
  }
  const double r = (t - t0_) / dt_;
  const double last = static_cast<double>(count_ - 1);
  if (r <= 0.0) {
    weight = 0.0;
    return 0;
  }
  if (r >= last) {
    weight = 1.0;
    return count_ - 2;
  }
  const double f = std::floor(r);
  weight = r - f;
  return static_cast<std::size_t>(f);
}

FrameWindow::Sample FrameWindow::sample(double x, double t) const noexcept {
  double w = 0.0;
  const std::size_t j = bracket(t, w);
  const FieldSample a = sample_field(*grid_, frame(j), x);
  if (count_ <= 1) return {a, a.density};
  const FieldSample b = sample_field(*grid_, frame(j + 1), x);
  Sample s;
  s.field.density = (1.0 - w) * a.density + w * b.density;
  s.field.current = (1.0 - w) * a.current + w * b.current;
  s.field.velocity = (1.0 - w) * a.velocity + w * b.velocity;
  s.min_density = std::min(a.density, b.density);
  return s;
}

std::optional<double> FrameWindow::node_at(double t) const noexcept {
  double w = 0.0;
  const std::size_t j = bracket(t, w);
  if (count_ <= 1) {
    return std::isnan(nodes_[0]) ? std::nullopt : std::optional<double>(nodes_[0]);
  }
  const double a = nodes_[j];
  const double b = nodes_[j + 1];
  if (std::isnan(a) || std::isnan(b)) return std::nullopt;
  return (1.0 - w) * a + w * b;
}

// ---------------------------------------------------------------------------

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = b1 - 5179.0 / 57600.0, e3 = b3 - 7571.0 / 16695.0, e4 = b4 - 393.0 / 640.0,
                 e5 = b5 - -92097.0 / 339200.0, e6 = b6 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

enum class EvalStatus { ok, off_grid, below_floor };

struct Hermite {
  double t0, t1, x0, x1, v0, v1;
  double operator()(double t) const noexcept {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * v0 + (-2 * s3 + 3 * s2) * x1 +
           (s3 - s2) * h * v1;
  }
};

}  // namespace

TrajectoryEnsemble::TrajectoryEnsemble(std::vector<double> initial_positions, double t0,
                                       TrajectoryOptions options)
    : options_(options), time_(t0), initial_(std::move(initial_positions)), positions_(initial_) {
  state_.reserve(positions_.size());
  for (double x : positions_) state_.push_back({x, options_.initial_step, 0});
}

TrajectoryEnsemble::Result TrajectoryEnsemble::advance_one(std::size_t k, State& s,
                                                           const FrameWindow& window) const {
  Result out;
  const Grid& grid = window.grid();
  const double lo = grid.x(1);
  const double hi = grid.x(grid.size() - 3);
  const double floor = options_.density_floor;
  const double t_end = window.end_time();

  EvalStatus status = EvalStatus::ok;
  auto eval = [&](double x, double t) -> double {
    if (!(x >= lo && x < hi)) {
      status = EvalStatus::off_grid;
      return 0.0;
    }
    const auto smp = window.sample(x, t);
    if (!(smp.min_density > floor)) {
      status = EvalStatus::below_floor;
      return 0.0;
    }
    return smp.field.velocity;
  };

  double t = time_;
  double x = s.x;
  if (s.last_sign == 0) {
    if (const auto n0 = window.node_at(t)) s.last_sign = x >= *n0 ? +1 : -1;
  }
  double k1 = eval(x, t);
  if (status != EvalStatus::ok) {
    throw TrajectoryError(status == EvalStatus::off_grid ? "trajectory left the grid"
                                                         : "trajectory entered a region below the density floor",
                          k, t);
  }

  while (t < t_end) {
    double h = std::min(s.h, t_end - t);
    const bool last = h >= t_end - t;
    status = EvalStatus::ok;
    const double k2 = eval(x + h * a21 * k1, t + c2 * h);
    const double k3 = eval(x + h * (a31 * k1 + a32 * k2), t + c3 * h);
    const double k4 = eval(x + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
    const double k5 = eval(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
    const double k6 =
        eval(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
    const double x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const double t_new = last ? t_end : t + h;
    const double k7 = eval(x_new, t_new);
    const double err_abs = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double scale = options_.abs_tol + options_.rel_tol * std::max(std::abs(x), std::abs(x_new));
    const double err = status == EvalStatus::ok ? err_abs / scale : 1e10;

    if (!(err <= 1.0)) {
      ++out.rejected;
      if (h <= options_.min_step) {
        std::ostringstream msg;
        if (status == EvalStatus::off_grid) {
          throw TrajectoryError("trajectory left the grid", k, t);
        }
        if (status == EvalStatus::below_floor) {
          throw TrajectoryError("trajectory entered a region below the density floor", k, t);
        }
        msg << "adaptive step underflow (h < " << options_.min_step << ") at x = " << x;
        throw StiffnessError(msg.str(), k, t);
      }
      const double factor = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.5) : 0.1;
      s.h = std::max(h * factor, options_.min_step);
      continue;
    }

    ++out.accepted;
    const Hermite path{t, t_new, x, x_new, k1, k7};
    if (const auto n1 = window.node_at(t_new)) {
      const int sign = x_new >= *n1 ? +1 : -1;
      if (s.last_sign != 0 && sign != s.last_sign) {
        double tc = t_new;
        const auto n0 = window.node_at(t);
        if (n0 && ((x >= *n0 ? +1 : -1) == s.last_sign)) {
          double a = t;
          double b = t_new;
          for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(b)); ++it) {
            const double m = 0.5 * (a + b);
            const auto nm = window.node_at(m);
            if (!nm) break;
            const int sm = path(m) >= *nm ? +1 : -1;
            (sm == s.last_sign ? a : b) = m;
          }
          tc = b;
        }
        const double xc = path(tc);
        CrossingRecord rec;
        rec.trajectory = k;
        rec.time = tc;
        rec.position = xc;
        rec.velocity = window.sample(xc, tc).field.velocity;
        rec.direction = sign;
        out.crossings.push_back(rec);
      }
      s.last_sign = sign;
    } else {
      // No crossing is inferred across a stretch without a node.
      s.last_sign = 0;
    }

    t = t_new;
    x = x_new;
    k1 = k7;
    const double grow = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    // Keep the proposed step when the final step of the window was truncated.
    if (!(last && h < s.h)) s.h = h * grow;
  }
  s.x = x;
  return out;
}

void TrajectoryEnsemble::advance(const FrameWindow& window) {
  const double t_end = window.end_time();
  if (!(t_end > time_)) return;
  const std::size_t n = state_.size();
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      try {
        results[k] = advance_one(k, state_[k], window);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options_.threads, n));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t k = 0; k < n; ++k) {
    positions_[k] = state_[k].x;
    accepted_ += results[k].accepted;
    rejected_ += results[k].rejected;
    crossings_.insert(crossings_.end(), results[k].crossings.begin(), results[k].crossings.end());
  }
  time_ = t_end;
}

std::vector<double> TrajectoryEnsemble::velocities(const FrameWindow& window) const {
  std::vector<double> v(positions_.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = window.sample(positions_[k], time_).field.velocity;
  }
  return v;
}

std::vector<CrossingRecord> TrajectoryEnsemble::first_crossings() const {
  std::vector<CrossingRecord> out;
  std::vector<bool> seen(positions_.size(), false);
  auto sorted = crossings_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.trajectory < b.trajectory || (a.trajectory == b.trajectory && a.time < b.time);
  });
  for (const auto& c : sorted) {
    if (c.direction > 0 && !seen[c.trajectory]) {
      seen[c.trajectory] = true;
      out.push_back(c);
    }
  }
  return out;
}

bool TrajectoryEnsemble::ordered() const noexcept {
  for (std::size_t k = 1; k < positions_.size(); ++k) {
    if (!(positions_[k] > positions_[k - 1])) return false;
  }
  return true;
}

std::vector<CrossingRecord> detect_crossings(std::span<const double> times,
                                             std::span<const std::vector<double>> samples,
                                             std::span<const double> node) {
  std::vector<CrossingRecord> out;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& xs = samples[k];
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
      if (std::isnan(node[j]) || std::isnan(node[j + 1])) continue;
      const double f0 = xs[j] - node[j];
      const double f1 = xs[j + 1] - node[j + 1];
      const int s0 = f0 >= 0.0 ? +1 : -1;
      const int s1 = f1 >= 0.0 ? +1 : -1;
      if (s0 == s1) continue;
      // Both interpolants are linear on the interval, so bisection converges
      // to the root of their difference.
      double a = 0.0;
      double b = 1.0;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = (1.0 - m) * f0 + m * f1;
        ((fm >= 0.0 ? +1 : -1) == s0 ? a : b) = m;
      }
      const double dt = times[j + 1] - times[j];
      CrossingRecord rec;
      rec.trajectory = k;
      rec.time = times[j] + b * dt;
      rec.position = (1.0 - b) * xs[j] + b * xs[j + 1];
      rec.velocity = (xs[j + 1] - xs[j]) / dt;
      rec.direction = s1;
      out.push_back(rec);
    }
  }
  return out;
}

double vmax_ensemble(std::span<const CrossingRecord> crossings, std::size_t ensemble_size) {
  if (crossings.empty() || ensemble_size == 0) {
    throw AnalysisError("no node crossings: the ensemble node velocity is undefined");
  }
  double s = 0.0;
  for (const auto& c : crossings) s += c.direction * c.velocity;
  return s / static_cast<double>(ensemble_size);
}

}  // namespace sapbohm
