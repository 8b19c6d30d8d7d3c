#include "fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <new>

namespace rogue::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  in_ = fftw_alloc_complex(n);
  out_ = fftw_alloc_complex(n);
  if (in_ == nullptr || out_ == nullptr) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
  // FFTW_ESTIMATE keeps plans (and therefore rounding) identical run to run.
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(static_cast<int>(n), in_, out_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(fwd_);
  fftw_destroy_plan(inv_);
  fftw_free(in_);
  fftw_free(out_);
}

void Fft::forward(std::span<const std::complex<double>> in,
                  std::span<std::complex<double>> out) {
  std::memcpy(in_, in.data(), n_ * sizeof(fftw_complex));
  fftw_execute(fwd_);
  std::memcpy(out.data(), out_, n_ * sizeof(fftw_complex));
}

void Fft::inverse(std::span<const std::complex<double>> in,
                  std::span<std::complex<double>> out) {
  std::memcpy(in_, in.data(), n_ * sizeof(fftw_complex));
  fftw_execute(inv_);
  const double scale = 1.0 / static_cast<double>(n_);
  const auto* src = reinterpret_cast<const std::complex<double>*>(out_);
  std::transform(src, src + n_, out.begin(), [scale](std::complex<double> v) { return v * scale; });
}

}  // namespace rogue::detail
