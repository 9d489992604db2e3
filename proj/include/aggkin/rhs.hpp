#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "aggkin/fft.hpp"
#include "aggkin/kernels.hpp"

namespace aggkin {

// Concentrations n_1..n_M at one time point. Index k means particle size k.
struct StateVector {
  std::vector<double> n;
  double t = 0.0;

  std::size_t size() const { return n.size(); }
};

// Sparse injection rates P_k >= 0, keyed by 1-based particle size.
struct SourceTerm {
  std::vector<std::pair<std::size_t, double>> rates;

  void validate(std::size_t m) const;
};

enum class ModelVariant { aggregation, aggregation_sources, aggregation_shattering };

struct ModelSpec {
  ModelVariant variant = ModelVariant::aggregation;
  KernelRep kernel;
  std::size_t m = 0;
  SourceTerm sources;        // aggregation_sources only
  double shatter_rate = 0.0;  // aggregation_shattering only

  void validate() const;
};

// Preallocated scratch for the convolution path plus the cumulative count of
// full right-hand-side evaluations. One workspace per concurrent evaluation;
// reuse never changes results versus fresh buffers.
class RhsWorkspace {
 public:
  RhsWorkspace() = default;

  std::uint64_t evals() const { return evals_; }
  void reset_evals() { evals_ = 0; }

 private:
  friend void birth_term(const KernelRep&, std::span<const double>, RhsWorkspace&,
                         std::span<double>);
  friend void death_term(const KernelRep&, std::span<const double>, RhsWorkspace&,
                         std::span<double>);
  friend void shattering_terms(const KernelRep&, std::span<const double>, double, RhsWorkspace&,
                               std::span<double>);
  friend void eval_rhs(const ModelSpec&, std::span<const double>, RhsWorkspace&,
                       std::span<double>);

  void prepare(std::size_t m);

  std::uint64_t evals_ = 0;
  std::size_t m_ = 0;
  std::unique_ptr<fft::Plan> plan_;                 // length next_pow2(2m)
  std::vector<std::complex<double>> packed_, acc_;  // fft buffers
  std::vector<double> rowsum_;                      // length m
  std::vector<double> birth_, death_, shat_;        // eval_rhs scratch
};

// Gain of size-s particles from coalescing pairs i + j = s (zero at s = 1).
// Low-rank kernels go through zero-padded fast convolutions, one rank
// component at a time in ascending order; dense kernels use the direct sum.
void birth_term(const KernelRep& kernel, std::span<const double> n, RhsWorkspace& ws,
                std::span<double> out);

// Loss of size-s particles by merging with any partner: n_s * sum_i K(s,i) n_i.
void death_term(const KernelRep& kernel, std::span<const double> n, RhsWorkspace& ws,
                std::span<double> out);

// Shattering contribution alone: monomer gain at s = 1, -lambda * (death term)
// at s >= 2. Mass-neutral within the truncation.
void shattering_terms(const KernelRep& kernel, std::span<const double> n, double lambda,
                      RhsWorkspace& ws, std::span<double> out);

// Full right-hand side S(n) of the configured model variant. Counts one
// evaluation on the workspace.
void eval_rhs(const ModelSpec& model, std::span<const double> n, RhsWorkspace& ws,
              std::span<double> out);

// Literal nested-sum evaluation against a dense kernel table, the reference
// the fast path is verified against. Guarded to m <= 4096.
std::vector<double> eval_rhs_dense_oracle(const ModelSpec& model, std::span<const double> n);

// Classical step bound for the explicit Euler scheme:
// a / max_i sum_j K(i,j) n_j. Diagnostic only; returns +infinity when the
// state gives no bound (e.g. all-zero n).
double euler_stability_bound(const KernelRep& kernel, std::span<const double> n, double a);

}  // namespace aggkin
