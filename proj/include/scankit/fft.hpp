#pragma once

// Thin FFTW wrapper for square complex grids. Plans are created under a
// mutex (the FFTW planner is not thread-safe); execution on distinct
// buffers is. FFTW_ESTIMATE keeps planning deterministic so repeated runs
// produce bit-identical transforms.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <stdexcept>

namespace scankit::fft {

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// Unnormalized in-place 2D DFT of an n x n row-major complex grid.
/// inverse=true applies the conjugate kernel (still unnormalized).
inline void dft2d_inplace(std::complex<double>* data, std::size_t n, bool inverse) {
  if (n == 0) throw std::invalid_argument("dft2d_inplace: empty grid");
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), raw, raw,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("dft2d_inplace: planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

}  // namespace scankit::fft
