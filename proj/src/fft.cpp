#include "aggkin/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#ifdef AGGKIN_USE_FFTW
#include <fftw3.h>

#include <mutex>
#endif

namespace aggkin::fft {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

#ifdef AGGKIN_USE_FFTW

namespace {
// FFTW plan creation is not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

Plan::Plan(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("fft::Plan: length must be a power of two");
  }
  std::vector<std::complex<double>> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW_UNALIGNED keeps the plans valid for any caller buffer.
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  inv_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (fwd_ == nullptr || inv_ == nullptr) throw std::runtime_error("fftw plan creation failed");
}

Plan::~Plan() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (inv_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void Plan::forward(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), buf, buf);
}

void Plan::inverse(std::complex<double>* data) const {
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(inv_), buf, buf);
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) data[i] *= scale;
}

#else  // built-in radix-2 fallback

Plan::Plan(std::size_t n) : n_(n) {
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::invalid_argument("fft::Plan: length must be a power of two");
  }
  bitrev_.resize(n);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rev = 0;
    for (std::size_t b = 0; b < log2n; ++b) {
      if (i & (std::size_t{1} << b)) rev |= std::size_t{1} << (log2n - 1 - b);
    }
    bitrev_[i] = rev;
  }
  tw_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double phi = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    tw_[k] = {std::cos(phi), std::sin(phi)};
  }
}

Plan::~Plan() = default;

void Plan::transform(std::complex<double>* data, bool invert) const {
  auto* a = reinterpret_cast<double*>(data);  // interleaved re/im
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j = bitrev_[i];
    if (i < j) {
      std::swap(a[2 * i], a[2 * j]);
      std::swap(a[2 * i + 1], a[2 * j + 1]);
    }
  }
  // first stage: unit twiddle
  for (std::size_t i = 0; i < n_; i += 2) {
    const double ur = a[2 * i], ui = a[2 * i + 1];
    const double vr = a[2 * i + 2], vi = a[2 * i + 3];
    a[2 * i] = ur + vr;
    a[2 * i + 1] = ui + vi;
    a[2 * i + 2] = ur - vr;
    a[2 * i + 3] = ui - vi;
  }
  const double sign = invert ? -1.0 : 1.0;  // conjugates the twiddle table
  const auto* tw = reinterpret_cast<const double*>(tw_.data());
  for (std::size_t len = 4; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n_ / len;
    for (std::size_t base = 0; base < n_; base += len) {
      double* lo = a + 2 * base;
      double* hi = a + 2 * (base + half);
      for (std::size_t j = 0; j < half; ++j) {
        const double wr = tw[2 * j * step];
        const double wi = sign * tw[2 * j * step + 1];
        const double xr = hi[2 * j], xi = hi[2 * j + 1];
        const double vr = xr * wr - xi * wi;
        const double vi = xr * wi + xi * wr;
        const double ur = lo[2 * j], ui = lo[2 * j + 1];
        lo[2 * j] = ur + vr;
        lo[2 * j + 1] = ui + vi;
        hi[2 * j] = ur - vr;
        hi[2 * j + 1] = ui - vi;
      }
    }
  }
  if (invert) {
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t i = 0; i < 2 * n_; ++i) a[i] *= scale;
  }
}

void Plan::forward(std::complex<double>* data) const { transform(data, false); }

void Plan::inverse(std::complex<double>* data) const { transform(data, true); }

#endif

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  Plan plan(n);
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  plan.forward(fa.data());
  plan.forward(fb.data());
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  plan.inverse(fa.data());
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace aggkin::fft
