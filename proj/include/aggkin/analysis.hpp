#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aggkin {

struct SlopeFit {
  std::size_t k_lo = 0;  // effective range after excluding nonpositive entries
  std::size_t k_hi = 0;
  double beta = 0.0;          // negated log-log slope
  double residual_rms = 0.0;  // in log-log space
  std::size_t points_used = 0;
  std::size_t points_excluded = 0;
};

// Unweighted least-squares line through (log k, log n_k) over k in
// [k_lo, k_hi]; beta is the negated slope. Nonpositive entries are excluded
// (counted in points_excluded, effective range reported); fewer than 8 usable
// points is an error.
SlopeFit fit_power_law(std::span<const double> n, std::size_t k_lo, std::size_t k_hi);

// Same fit with the exponential cutoff divided out: log n_k + lambda^2 k
// against log k. lambda = 0 reduces exactly to fit_power_law.
SlopeFit fit_cutoff(std::span<const double> n, double lambda, std::size_t k_lo, std::size_t k_hi);

struct OscillationSummary {
  std::vector<double> peak_times;
  std::vector<double> periods;     // successive peak differences
  std::vector<double> amplitudes;  // peak minus the following trough
  std::size_t cycle_count = 0;     // complete peak-to-peak intervals
};

// Peak detection on a time series: strict local maxima whose topographic
// prominence exceeds prominence_fraction of the series range. A monotone or
// constant series yields zero cycles.
OscillationSummary detect_oscillations(std::span<const double> t, std::span<const double> value,
                                       double prominence_fraction = 0.01);

}  // namespace aggkin
