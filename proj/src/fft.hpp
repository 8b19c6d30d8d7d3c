#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <fftw3.h>

namespace rogue::detail {

// Owns an FFTW plan pair over private buffers.  Plan creation is serialized
// because the FFTW planner is not thread-safe; execution is.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }
  // Unnormalized forward transform.
  void forward(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out);
  // Inverse transform including the 1/n factor.
  void inverse(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out);

 private:
  std::size_t n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan fwd_;
  fftw_plan inv_;
};

}  // namespace rogue::detail
