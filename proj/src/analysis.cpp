#include "aggkin/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aggkin {

namespace {

SlopeFit fit_log_line(std::span<const double> n, double cutoff_rate, std::size_t k_lo,
                      std::size_t k_hi) {
  if (k_lo < 1 || k_hi > n.size() || k_lo >= k_hi) {
    throw std::invalid_argument("fit range must satisfy 1 <= k_lo < k_hi <= size");
  }
  SlopeFit fit;
  std::vector<double> xs, ys;
  xs.reserve(k_hi - k_lo + 1);
  ys.reserve(k_hi - k_lo + 1);
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double nk = n[k - 1];
    if (!(nk > 0.0)) {
      ++fit.points_excluded;
      continue;
    }
    const double kk = static_cast<double>(k);
    xs.push_back(std::log(kk));
    ys.push_back(std::log(nk) + cutoff_rate * kk);
    if (fit.k_lo == 0) fit.k_lo = k;
    fit.k_hi = k;
  }
  if (xs.size() < 8) {
    throw std::invalid_argument("fit needs at least 8 usable points, got " +
                                std::to_string(xs.size()));
  }
  const double count = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (slope * xs[i] + intercept);
    rss += r * r;
  }
  fit.beta = -slope;
  fit.residual_rms = std::sqrt(rss / count);
  fit.points_used = xs.size();
  return fit;
}

}  // namespace

SlopeFit fit_power_law(std::span<const double> n, std::size_t k_lo, std::size_t k_hi) {
  return fit_log_line(n, 0.0, k_lo, k_hi);
}

SlopeFit fit_cutoff(std::span<const double> n, double lambda, std::size_t k_lo,
                    std::size_t k_hi) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("cutoff rate lambda must be finite and >= 0");
  }
  return fit_log_line(n, lambda * lambda, k_lo, k_hi);
}

OscillationSummary detect_oscillations(std::span<const double> t, std::span<const double> value,
                                       double prominence_fraction) {
  if (t.size() != value.size()) throw std::invalid_argument("time and value sizes differ");
  if (t.size() < 100) throw std::invalid_argument("need at least 100 records");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw std::invalid_argument("times must be strictly increasing");
  }

  OscillationSummary summary;
  const auto [lo_it, hi_it] = std::minmax_element(value.begin(), value.end());
  const double range = *hi_it - *lo_it;
  if (range <= 0.0) return summary;  // constant series
  const double min_prominence = prominence_fraction * range;

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < value.size(); ++i) {
    if (!(value[i] > value[i - 1] && value[i] > value[i + 1])) continue;
    // Topographic prominence: lowest point on the way to higher ground on
    // either side.
    double left_min = value[i];
    for (std::size_t j = i; j-- > 0;) {
      if (value[j] > value[i]) break;
      left_min = std::min(left_min, value[j]);
    }
    double right_min = value[i];
    for (std::size_t j = i + 1; j < value.size(); ++j) {
      if (value[j] > value[i]) break;
      right_min = std::min(right_min, value[j]);
    }
    if (value[i] - std::max(left_min, right_min) >= min_prominence) peaks.push_back(i);
  }

  for (std::size_t p = 0; p < peaks.size(); ++p) {
    summary.peak_times.push_back(t[peaks[p]]);
    const std::size_t trough_end = p + 1 < peaks.size() ? peaks[p + 1] : value.size();
    double trough = value[peaks[p]];
    for (std::size_t j = peaks[p] + 1; j < trough_end; ++j) trough = std::min(trough, value[j]);
    summary.amplitudes.push_back(value[peaks[p]] - trough);
    if (p > 0) summary.periods.push_back(t[peaks[p]] - t[peaks[p - 1]]);
  }
  summary.cycle_count = peaks.empty() ? 0 : peaks.size() - 1;
  return summary;
}

}  // namespace aggkin
