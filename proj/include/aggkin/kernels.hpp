#pragma once

#include <cstddef>
#include <filesystem>
#include <variant>
#include <vector>

namespace aggkin {

enum class KernelVariant { constant, generalized_brownian, free_molecular, custom_factors };

// Kernel selection. `alpha` is read only for generalized_brownian,
// `factors_path` only for custom_factors.
//
// Note generalized_brownian with alpha = 0 gives K(i,j) = 2 everywhere, which
// is twice the constant kernel K(i,j) = 1; both are available as distinct
// specs.
struct KernelSpec {
  KernelVariant variant = KernelVariant::constant;
  double alpha = 0.0;
  std::filesystem::path factors_path;
};

// Exact separable factorization K(i,j) = sum_a U(i,a) * V(a,j) of rank r.
// Sizes i, j are 1-based.
struct LowRankFactors {
  std::size_t m = 0;
  std::size_t r = 0;
  std::vector<double> u;  // m x r, row-major
  std::vector<double> v;  // r x m, row-major

  double u_at(std::size_t i, std::size_t a) const { return u[(i - 1) * r + a]; }
  double v_at(std::size_t a, std::size_t j) const { return v[a * m + (j - 1)]; }
  double entry(std::size_t i, std::size_t j) const;
};

struct DenseKernel {
  std::size_t m = 0;
  std::vector<double> k;  // m x m, row-major

  double entry(std::size_t i, std::size_t j) const { return k[(i - 1) * m + (j - 1)]; }
};

using KernelRep = std::variant<DenseKernel, LowRankFactors>;

std::size_t kernel_size(const KernelRep& rep);
double kernel_rep_entry(const KernelRep& rep, std::size_t i, std::size_t j);

/// Closed-form rate K(i,j); symmetric in (i, j). Not defined for
/// custom_factors (entries come from the factor file, not a formula).
double kernel_entry(const KernelSpec& spec, std::size_t i, std::size_t j);

// Exact factorization: constant is rank 1, generalized Brownian rank 2,
// custom_factors loads from file. free_molecular has no exact finite-rank
// form and is rejected; use build_dense for it.
LowRankFactors build_factors(const KernelSpec& spec, std::size_t m);

// Dense table of rates; refuses m > 32768.
DenseKernel build_dense(const KernelSpec& spec, std::size_t m);

// Plain-text factor file: header line "M R", then M rows of R values (U),
// then R rows of M values (V).
LowRankFactors load_factors(const std::filesystem::path& path);
void save_factors(const LowRankFactors& factors, const std::filesystem::path& path);

// Checks symmetry and nonnegativity of the reconstructed kernel on a
// deterministic sample of index pairs (all pairs when m <= 128). Throws on
// violation.
void validate_factors(const LowRankFactors& factors);

}  // namespace aggkin
