#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include "sapbohm/grid.hpp"

namespace sapbohm {

// Owns an aligned in-place buffer and the FFTW plans that act on it. Plans are
// built with FFTW_ESTIMATE so that the transform, and every result downstream
// of it, is bit-reproducible between processes.
class FftWorkspace {
 public:
  explicit FftWorkspace(std::size_t n);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
  FftWorkspace(FftWorkspace&& other) noexcept;
  FftWorkspace& operator=(FftWorkspace&& other) noexcept;

  std::size_t size() const noexcept { return n_; }
  std::span<cplx> data() noexcept { return {buffer_, n_}; }
  std::span<const cplx> data() const noexcept { return {buffer_, n_}; }

  // Unnormalized transforms; forward followed by backward multiplies by n.
  void forward() noexcept;
  void backward() noexcept;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  cplx* buffer_ = nullptr;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

// d^order/dx^order of the values, computed spectrally. The Nyquist component
// is dropped for odd orders so that real input gives real output.
ComplexField spectral_derivative(const Grid& grid, std::span<const cplx> values, int order);

}  // namespace sapbohm
