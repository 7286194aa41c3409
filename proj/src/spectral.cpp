#include "sapbohm/spectral.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <utility>

namespace sapbohm {
namespace {

// FFTW planning is not thread safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftWorkspace::FftWorkspace(std::size_t n) : n_(n) {
  buffer_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (buffer_ == nullptr) throw std::bad_alloc();
  auto* raw = reinterpret_cast<fftw_complex*>(buffer_);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (std::size_t i = 0; i < n; ++i) buffer_[i] = 0.0;
}

FftWorkspace::~FftWorkspace() { release(); }

FftWorkspace::FftWorkspace(FftWorkspace&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      buffer_(std::exchange(other.buffer_, nullptr)),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      backward_plan_(std::exchange(other.backward_plan_, nullptr)) {}

FftWorkspace& FftWorkspace::operator=(FftWorkspace&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    buffer_ = std::exchange(other.buffer_, nullptr);
    forward_plan_ = std::exchange(other.forward_plan_, nullptr);
    backward_plan_ = std::exchange(other.backward_plan_, nullptr);
  }
  return *this;
}

void FftWorkspace::release() noexcept {
  if (forward_plan_ != nullptr || backward_plan_ != nullptr) {
    std::lock_guard lock(planner_mutex());
    if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  }
  forward_plan_ = backward_plan_ = nullptr;
  if (buffer_) fftw_free(buffer_);
  buffer_ = nullptr;
}

void FftWorkspace::forward() noexcept { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }
void FftWorkspace::backward() noexcept { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }

ComplexField spectral_derivative(const Grid& grid, std::span<const cplx> values, int order) {
  const std::size_t n = grid.size();
  FftWorkspace fft(n);
  auto buf = fft.data();
  std::copy(values.begin(), values.end(), buf.begin());
  fft.forward();
  const auto& k = grid.wavenumbers();
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    cplx factor = 1.0;
    const cplx ik(0.0, k[j]);
    for (int o = 0; o < order; ++o) factor *= ik;
    buf[j] *= factor * scale;
  }
  if (order % 2 == 1) buf[n / 2] = 0.0;
  fft.backward();
  return ComplexField(buf.begin(), buf.end());
}

}  // namespace sapbohm
