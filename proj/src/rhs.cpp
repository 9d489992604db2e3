#include "aggkin/rhs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aggkin {

namespace {

constexpr std::size_t kOracleSizeLimit = 4096;

void check_size(const KernelRep& kernel, std::span<const double> n, std::span<double> out) {
  const std::size_t m = kernel_size(kernel);
  if (n.size() != m || out.size() != m) {
    throw std::invalid_argument("state size " + std::to_string(n.size()) +
                                " does not match kernel size " + std::to_string(m));
  }
  if (m < 2) throw std::invalid_argument("state must have at least two sizes");
}

// Row sums r_s = sum_j K(s,j) n_j shared by the death and shattering terms.
void kernel_row_sums(const KernelRep& kernel, std::span<const double> n,
                     std::span<double> rowsum) {
  const std::size_t m = n.size();
  if (const auto* lr = std::get_if<LowRankFactors>(&kernel)) {
    for (std::size_t s = 0; s < m; ++s) rowsum[s] = 0.0;
    for (std::size_t a = 0; a < lr->r; ++a) {
      double w = 0.0;
      const double* vrow = lr->v.data() + a * m;
      for (std::size_t j = 0; j < m; ++j) w += vrow[j] * n[j];
      const double* ucol = lr->u.data() + a;
      for (std::size_t s = 0; s < m; ++s) rowsum[s] += ucol[s * lr->r] * w;
    }
  } else {
    const auto& d = std::get<DenseKernel>(kernel);
    for (std::size_t s = 0; s < m; ++s) {
      const double* row = d.k.data() + s * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += row[j] * n[j];
      rowsum[s] = acc;
    }
  }
}

}  // namespace

void SourceTerm::validate(std::size_t m) const {
  for (const auto& [k, rate] : rates) {
    if (k < 1 || k > m) {
      throw std::invalid_argument("source index " + std::to_string(k) + " outside 1.." +
                                  std::to_string(m));
    }
    if (!std::isfinite(rate) || rate < 0.0) {
      throw std::invalid_argument("source rate at k=" + std::to_string(k) +
                                  " must be finite and >= 0");
    }
  }
}

void ModelSpec::validate() const {
  if (m < 2) throw std::invalid_argument("truncation size m must be >= 2");
  if (kernel_size(kernel) != m) throw std::invalid_argument("kernel size does not match m");
  if (variant == ModelVariant::aggregation_sources) sources.validate(m);
  if (variant == ModelVariant::aggregation_shattering) {
    if (!std::isfinite(shatter_rate) || shatter_rate < 0.0) {
      throw std::invalid_argument("shattering rate lambda must be finite and >= 0");
    }
  }
}

void RhsWorkspace::prepare(std::size_t m) {
  if (m_ == m) return;
  m_ = m;
  const std::size_t padded = fft::next_pow2(2 * m);
  plan_ = std::make_unique<fft::Plan>(padded);
  packed_.assign(padded, {});
  acc_.assign(padded, {});
  rowsum_.assign(m, 0.0);
  birth_.assign(m, 0.0);
  death_.assign(m, 0.0);
  shat_.assign(m, 0.0);
}

void birth_term(const KernelRep& kernel, std::span<const double> n, RhsWorkspace& ws,
                std::span<double> out) {
  check_size(kernel, n, out);
  const std::size_t m = n.size();
  ws.prepare(m);

  if (const auto* lr = std::get_if<LowRankFactors>(&kernel)) {
    const std::size_t padded = ws.plan_->size();

    // Ranks whose factor pair repeats an earlier one (directly or swapped)
    // contribute the same product spectrum; convolution commutes, so they
    // fold into an integer weight instead of another transform.
    const std::size_t r = lr->r;
    std::vector<double> weight(r, 1.0);
    std::vector<bool> skip(r, false);
    auto u_col_equals = [&](std::size_t a, const double* other, std::size_t stride_other) {
      for (std::size_t i = 0; i < m; ++i) {
        if (lr->u[i * r + a] != other[i * stride_other]) return false;
      }
      return true;
    };
    for (std::size_t a = 1; a < r; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        if (skip[b]) continue;
        const bool swapped =
            u_col_equals(a, lr->v.data() + b * m, 1) && u_col_equals(b, lr->v.data() + a * m, 1);
        const bool same =
            u_col_equals(a, lr->u.data() + b, r) &&
            std::equal(lr->v.begin() + static_cast<std::ptrdiff_t>(a * m),
                       lr->v.begin() + static_cast<std::ptrdiff_t>((a + 1) * m),
                       lr->v.begin() + static_cast<std::ptrdiff_t>(b * m));
        if (swapped || same) {
          weight[b] += 1.0;
          skip[a] = true;
          break;
        }
      }
    }

    std::fill(ws.acc_.begin(), ws.acc_.end(), std::complex<double>{});
    for (std::size_t a = 0; a < r; ++a) {
      if (skip[a]) continue;
      // One packed transform per rank: z = (u.n) + i (v.n), spectra split by
      // conjugate symmetry, product spectrum accumulated.
      for (std::size_t i = 0; i < m; ++i) {
        ws.packed_[i] = {lr->u[i * r + a] * n[i], lr->v[a * m + i] * n[i]};
      }
      std::fill(ws.packed_.begin() + static_cast<std::ptrdiff_t>(m), ws.packed_.end(),
                std::complex<double>{});
      ws.plan_->forward(ws.packed_.data());
      const double w = weight[a];
      for (std::size_t k = 0; k < padded; ++k) {
        const std::complex<double> zk = ws.packed_[k];
        const std::complex<double> zmk = std::conj(ws.packed_[(padded - k) & (padded - 1)]);
        const std::complex<double> ak = 0.5 * (zk + zmk);
        const std::complex<double> bk = std::complex<double>(0.0, -0.5) * (zk - zmk);
        ws.acc_[k] += w * (ak * bk);
      }
    }
    ws.plan_->inverse(ws.acc_.data());
    out[0] = 0.0;
    // conv index s-2 holds sum over size pairs i + j = s
    for (std::size_t s = 2; s <= m; ++s) out[s - 1] = 0.5 * ws.acc_[s - 2].real();
    return;
  }

  const auto& d = std::get<DenseKernel>(kernel);
  out[0] = 0.0;
  for (std::size_t s = 2; s <= m; ++s) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s; ++i) acc += d.entry(i, s - i) * n[i - 1] * n[s - i - 1];
    out[s - 1] = 0.5 * acc;
  }
}

void death_term(const KernelRep& kernel, std::span<const double> n, RhsWorkspace& ws,
                std::span<double> out) {
  check_size(kernel, n, out);
  ws.prepare(n.size());
  kernel_row_sums(kernel, n, ws.rowsum_);
  for (std::size_t s = 0; s < n.size(); ++s) out[s] = n[s] * ws.rowsum_[s];
}

void shattering_terms(const KernelRep& kernel, std::span<const double> n, double lambda,
                      RhsWorkspace& ws, std::span<double> out) {
  check_size(kernel, n, out);
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw std::invalid_argument("shattering rate lambda must be finite and >= 0");
  }
  const std::size_t m = n.size();
  ws.prepare(m);
  kernel_row_sums(kernel, n, ws.rowsum_);

  // Monomer gain: (lambda/2) sum_{i,j>=2} (i+j) K n_i n_j
  //             + lambda n_1 sum_{j>=2} j K(1,j) n_j.
  double pair_gain = 0.0;
  double mono_gain = 0.0;
  if (const auto* lr = std::get_if<LowRankFactors>(&kernel)) {
    for (std::size_t a = 0; a < lr->r; ++a) {
      double su0 = 0.0, su1 = 0.0, sv0 = 0.0, sv1 = 0.0;
      for (std::size_t i = 2; i <= m; ++i) {
        const double size = static_cast<double>(i);
        su0 += lr->u_at(i, a) * n[i - 1];
        su1 += size * lr->u_at(i, a) * n[i - 1];
        sv0 += lr->v_at(a, i) * n[i - 1];
        sv1 += size * lr->v_at(a, i) * n[i - 1];
      }
      pair_gain += su1 * sv0 + su0 * sv1;
      mono_gain += lr->u_at(1, a) * sv1;
    }
  } else {
    const auto& d = std::get<DenseKernel>(kernel);
    for (std::size_t i = 2; i <= m; ++i) {
      for (std::size_t j = 2; j <= m; ++j) {
        pair_gain += static_cast<double>(i + j) * d.entry(i, j) * n[i - 1] * n[j - 1];
      }
    }
    for (std::size_t j = 2; j <= m; ++j) {
      mono_gain += static_cast<double>(j) * d.entry(1, j) * n[j - 1];
    }
  }
  out[0] = 0.5 * lambda * pair_gain + lambda * n[0] * mono_gain;
  for (std::size_t s = 2; s <= m; ++s) out[s - 1] = -lambda * n[s - 1] * ws.rowsum_[s - 1];
}

void eval_rhs(const ModelSpec& model, std::span<const double> n, RhsWorkspace& ws,
              std::span<double> out) {
  if (n.size() != model.m || out.size() != model.m) {
    throw std::invalid_argument("state size does not match model");
  }
  ws.prepare(model.m);
  ws.evals_ += 1;

  birth_term(model.kernel, n, ws, ws.birth_);
  death_term(model.kernel, n, ws, ws.death_);
  for (std::size_t s = 0; s < model.m; ++s) out[s] = ws.birth_[s] - ws.death_[s];

  switch (model.variant) {
    case ModelVariant::aggregation:
      break;
    case ModelVariant::aggregation_sources:
      for (const auto& [k, rate] : model.sources.rates) out[k - 1] += rate;
      break;
    case ModelVariant::aggregation_shattering:
      shattering_terms(model.kernel, n, model.shatter_rate, ws, ws.shat_);
      for (std::size_t s = 0; s < model.m; ++s) out[s] += ws.shat_[s];
      break;
  }
}

std::vector<double> eval_rhs_dense_oracle(const ModelSpec& model, std::span<const double> n) {
  const auto* dense = std::get_if<DenseKernel>(&model.kernel);
  if (dense == nullptr) throw std::invalid_argument("oracle requires a dense kernel");
  const std::size_t m = model.m;
  if (n.size() != m) throw std::invalid_argument("state size does not match model");
  if (m > kOracleSizeLimit) {
    throw std::invalid_argument("dense oracle guarded to m <= " +
                                std::to_string(kOracleSizeLimit));
  }
  auto kk = [&](std::size_t i, std::size_t j) { return dense->entry(i, j); };

  std::vector<double> out(m, 0.0);
  for (std::size_t s = 1; s <= m; ++s) {
    double birth = 0.0;
    for (std::size_t i = 1; i + 1 <= s; ++i) {
      birth += kk(i, s - i) * n[i - 1] * n[s - i - 1];
    }
    birth *= 0.5;
    double death = 0.0;
    for (std::size_t i = 1; i <= m; ++i) death += kk(s, i) * n[i - 1];
    death *= n[s - 1];
    out[s - 1] = birth - death;
  }
  if (model.variant == ModelVariant::aggregation_sources) {
    for (const auto& [k, rate] : model.sources.rates) out[k - 1] += rate;
  } else if (model.variant == ModelVariant::aggregation_shattering) {
    const double lambda = model.shatter_rate;
    double pair_gain = 0.0;
    for (std::size_t i = 2; i <= m; ++i) {
      for (std::size_t j = 2; j <= m; ++j) {
        pair_gain += static_cast<double>(i + j) * kk(i, j) * n[i - 1] * n[j - 1];
      }
    }
    double mono_gain = 0.0;
    for (std::size_t j = 2; j <= m; ++j) {
      mono_gain += static_cast<double>(j) * kk(1, j) * n[j - 1];
    }
    out[0] += 0.5 * lambda * pair_gain + lambda * n[0] * mono_gain;
    for (std::size_t s = 2; s <= m; ++s) {
      double rowsum = 0.0;
      for (std::size_t i = 1; i <= m; ++i) rowsum += kk(s, i) * n[i - 1];
      out[s - 1] -= lambda * n[s - 1] * rowsum;
    }
  }
  return out;
}

double euler_stability_bound(const KernelRep& kernel, std::span<const double> n, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("euler bound factor a must be > 0");
  const std::size_t m = kernel_size(kernel);
  if (n.size() != m) throw std::invalid_argument("state size does not match kernel");
  std::vector<double> rowsum(m, 0.0);
  kernel_row_sums(kernel, n, rowsum);
  double peak = 0.0;
  for (double r : rowsum) peak = std::max(peak, r);
  if (!(peak > 0.0)) return std::numeric_limits<double>::infinity();
  return a / peak;
}

}  // namespace aggkin
