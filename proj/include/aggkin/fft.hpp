#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace aggkin::fft {

/// Smallest power of two >= n (n >= 1).
std::size_t next_pow2(std::size_t n);

// Complex FFT plan for one fixed power-of-two length. Backed by FFTW when the
// build finds it, otherwise by a built-in iterative radix-2 transform with
// cached twiddles.
class Plan {
 public:
  explicit Plan(std::size_t n);
  ~Plan();
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  std::size_t size() const { return n_; }

  void forward(std::complex<double>* data) const;
  // Inverse transform, includes the 1/n scaling.
  void inverse(std::complex<double>* data) const;

 private:
  std::size_t n_ = 0;
#ifdef AGGKIN_USE_FFTW
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
#else
  void transform(std::complex<double>* data, bool invert) const;

  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> tw_;  // exp(-2*pi*i*k/n), k < n/2
#endif
};

// Linear (acyclic) convolution c[s] = sum_{i+j=s} a[i]*b[j], output length
// |a|+|b|-1, computed with zero-padding to the next power of two. Reference
// helper; the hot path drives Plan directly on preallocated buffers.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

}  // namespace aggkin::fft
