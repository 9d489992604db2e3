#include "aggkin/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aggkin {

namespace {

constexpr std::size_t kDenseSizeLimit = 32768;  // 2^15

void check_indices(std::size_t i, std::size_t j) {
  if (i < 1 || j < 1) throw std::invalid_argument("kernel indices are 1-based");
}

}  // namespace

double LowRankFactors::entry(std::size_t i, std::size_t j) const {
  double acc = 0.0;
  for (std::size_t a = 0; a < r; ++a) acc += u_at(i, a) * v_at(a, j);
  return acc;
}

std::size_t kernel_size(const KernelRep& rep) {
  return std::visit([](const auto& k) { return k.m; }, rep);
}

double kernel_rep_entry(const KernelRep& rep, std::size_t i, std::size_t j) {
  return std::visit([&](const auto& k) { return k.entry(i, j); }, rep);
}

double kernel_entry(const KernelSpec& spec, std::size_t i, std::size_t j) {
  check_indices(i, j);
  const double x = static_cast<double>(i);
  const double y = static_cast<double>(j);
  switch (spec.variant) {
    case KernelVariant::constant:
      return 1.0;
    case KernelVariant::generalized_brownian: {
      if (!std::isfinite(spec.alpha) || spec.alpha < 0.0) {
        throw std::invalid_argument("generalized Brownian kernel needs finite alpha >= 0");
      }
      return std::pow(x / y, spec.alpha) + std::pow(y / x, spec.alpha);
    }
    case KernelVariant::free_molecular:
      return (std::cbrt(x) + std::cbrt(y)) * (std::cbrt(x) + std::cbrt(y)) *
             std::sqrt(1.0 / x + 1.0 / y);
    case KernelVariant::custom_factors:
      throw std::invalid_argument(
          "custom_factors kernel has no closed-form entry; use the loaded factors");
  }
  throw std::logic_error("unreachable kernel variant");
}

LowRankFactors build_factors(const KernelSpec& spec, std::size_t m) {
  if (m < 1) throw std::invalid_argument("kernel size must be positive");
  LowRankFactors f;
  f.m = m;
  switch (spec.variant) {
    case KernelVariant::constant: {
      f.r = 1;
      f.u.assign(m, 1.0);
      f.v.assign(m, 1.0);
      return f;
    }
    case KernelVariant::generalized_brownian: {
      if (!std::isfinite(spec.alpha) || spec.alpha < 0.0) {
        throw std::invalid_argument("generalized Brownian kernel needs finite alpha >= 0");
      }
      // (i/j)^a + (j/i)^a = i^a * j^-a + i^-a * j^a
      f.r = 2;
      f.u.resize(m * 2);
      f.v.resize(2 * m);
      for (std::size_t i = 1; i <= m; ++i) {
        const double p = std::pow(static_cast<double>(i), spec.alpha);
        f.u[(i - 1) * 2 + 0] = p;
        f.u[(i - 1) * 2 + 1] = 1.0 / p;
        f.v[0 * m + (i - 1)] = 1.0 / p;
        f.v[1 * m + (i - 1)] = p;
      }
      return f;
    }
    case KernelVariant::custom_factors: {
      LowRankFactors loaded = load_factors(spec.factors_path);
      if (loaded.m != m) {
        throw std::invalid_argument("factor file size " + std::to_string(loaded.m) +
                                    " does not match requested size " + std::to_string(m));
      }
      validate_factors(loaded);
      return loaded;
    }
    case KernelVariant::free_molecular:
      throw std::invalid_argument(
          "free-molecular kernel: no exact factorization; use a dense kernel or custom factors");
  }
  throw std::logic_error("unreachable kernel variant");
}

DenseKernel build_dense(const KernelSpec& spec, std::size_t m) {
  if (m < 1) throw std::invalid_argument("kernel size must be positive");
  if (m > kDenseSizeLimit) {
    throw std::invalid_argument("dense kernel refused for m > " + std::to_string(kDenseSizeLimit));
  }
  DenseKernel d;
  d.m = m;
  d.k.resize(m * m);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) {
      const double val = kernel_entry(spec, i, j);
      d.k[(i - 1) * m + (j - 1)] = val;
      d.k[(j - 1) * m + (i - 1)] = val;
    }
  }
  return d;
}

LowRankFactors load_factors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open factor file: " + path.string());
  std::size_t m = 0, r = 0;
  if (!(in >> m >> r) || m < 1 || r < 1) {
    throw std::runtime_error("factor file " + path.string() + ": bad header, expected \"M R\"");
  }
  LowRankFactors f;
  f.m = m;
  f.r = r;
  f.u.resize(m * r);
  f.v.resize(r * m);
  for (double& x : f.u) {
    if (!(in >> x)) throw std::runtime_error("factor file " + path.string() + ": truncated U block");
  }
  for (double& x : f.v) {
    if (!(in >> x)) throw std::runtime_error("factor file " + path.string() + ": truncated V block");
  }
  return f;
}

void save_factors(const LowRankFactors& factors, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write factor file: " + path.string());
  out << factors.m << ' ' << factors.r << '\n';
  char buf[32];
  for (std::size_t i = 1; i <= factors.m; ++i) {
    for (std::size_t a = 0; a < factors.r; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", factors.u_at(i, a));
      out << buf << (a + 1 == factors.r ? '\n' : ' ');
    }
  }
  for (std::size_t a = 0; a < factors.r; ++a) {
    for (std::size_t j = 1; j <= factors.m; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", factors.v_at(a, j));
      out << buf << (j == factors.m ? '\n' : ' ');
    }
  }
}

void validate_factors(const LowRankFactors& f) {
  if (f.m < 1 || f.r < 1 || f.u.size() != f.m * f.r || f.v.size() != f.r * f.m) {
    throw std::invalid_argument("malformed low-rank factors");
  }
  // Deterministic index sample: everything for small sizes, otherwise a
  // stride grid plus the boundary.
  std::vector<std::size_t> idx;
  if (f.m <= 128) {
    for (std::size_t i = 1; i <= f.m; ++i) idx.push_back(i);
  } else {
    const std::size_t stride = f.m / 64;
    for (std::size_t i = 1; i <= f.m; i += stride) idx.push_back(i);
    idx.push_back(f.m);
  }
  for (std::size_t i : idx) {
    for (std::size_t j : idx) {
      const double kij = f.entry(i, j);
      const double kji = f.entry(j, i);
      if (!(std::abs(kij - kji) <= 1e-12 * std::max(1.0, std::abs(kij)))) {
        throw std::invalid_argument("factor reconstruction is not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (kij < 0.0) {
        throw std::invalid_argument("factor reconstruction is negative at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      }
    }
  }
}

}  // namespace aggkin
