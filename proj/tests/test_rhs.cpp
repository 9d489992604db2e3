#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "aggkin/rhs.hpp"

using namespace aggkin;

namespace {

std::vector<double> random_state(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> n(m);
  for (double& x : n) x = uni(rng);
  return n;
}

double rel_max_diff(std::span<const double> got, std::span<const double> want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num = std::max(num, std::abs(got[i] - want[i]));
    den = std::max(den, std::abs(want[i]));
  }
  return den > 0.0 ? num / den : num;
}

ModelSpec constant_kernel_model(ModelVariant variant, std::size_t m, bool dense = false) {
  ModelSpec model;
  model.variant = variant;
  model.m = m;
  const KernelSpec spec{KernelVariant::constant, 0.0, {}};
  if (dense) {
    model.kernel = build_dense(spec, m);
  } else {
    model.kernel = build_factors(spec, m);
  }
  return model;
}

}  // namespace

TEST_SUITE("rhs") {

TEST_CASE("birth term hand values, constant kernel") {
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 3)};
  RhsWorkspace ws;
  std::vector<double> out(3);

  birth_term(kernel, std::vector<double>{1.0, 0.0, 0.0}, ws, out);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(out[2]) <= 1e-14);

  birth_term(kernel, std::vector<double>{0.0, 0.0, 0.0}, ws, out);
  for (double x : out) CHECK(std::abs(x) <= 1e-15);
}

TEST_CASE("death term hand values, constant kernel") {
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 3)};
  RhsWorkspace ws;
  std::vector<double> out(3);

  death_term(kernel, std::vector<double>{1.0, 0.0, 0.0}, ws, out);
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);

  death_term(kernel, std::vector<double>{0.0, 0.0, 0.0}, ws, out);
  for (double x : out) CHECK(x == 0.0);
}

TEST_CASE("shattering terms hand values and mass neutrality") {
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 3)};
  RhsWorkspace ws;
  std::vector<double> out(3);

  // K = 1, lambda = 1, n = (0,1,0): monomer gain 2, dimer loss -1
  shattering_terms(kernel, std::vector<double>{0.0, 1.0, 0.0}, 1.0, ws, out);
  CHECK(out[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(out[2] == 0.0);
  CHECK(1.0 * out[0] + 2.0 * out[1] + 3.0 * out[2] == doctest::Approx(0.0));

  SUBCASE("lambda = 0 vanishes") {
    std::mt19937_64 rng(3);
    const auto n = random_state(rng, 3);
    shattering_terms(kernel, n, 0.0, ws, out);
    for (double x : out) CHECK(x == 0.0);
  }
  SUBCASE("negative lambda rejected") {
    CHECK_THROWS(shattering_terms(kernel, std::vector<double>{0.0, 1.0, 0.0}, -1.0, ws, out));
  }
}

TEST_CASE("shattering mass neutrality on random states") {
  std::mt19937_64 rng(17);
  for (double alpha : {0.0, 0.95}) {
    const std::size_t m = 96;
    const auto kernel =
        KernelRep{build_factors(KernelSpec{KernelVariant::generalized_brownian, alpha, {}}, m)};
    RhsWorkspace ws;
    std::vector<double> out(m);
    for (int rep = 0; rep < 10; ++rep) {
      const auto n = random_state(rng, m);
      shattering_terms(kernel, n, 0.01, ws, out);
      double flux = 0.0;
      for (std::size_t s = 1; s <= m; ++s) flux += static_cast<double>(s) * out[s - 1];
      CHECK(std::abs(flux) <= 1e-12 * std::abs(out[0]));
    }
  }
}

TEST_CASE("eval_rhs hand values") {
  RhsWorkspace ws;
  std::vector<double> out(3);
  const std::vector<double> n{1.0, 0.0, 0.0};

  SUBCASE("pure aggregation") {
    const auto model = constant_kernel_model(ModelVariant::aggregation, 3);
    eval_rhs(model, n, ws, out);
    CHECK(out[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(out[2]) <= 1e-14);
  }
  SUBCASE("monomer source shifts the first entry") {
    auto model = constant_kernel_model(ModelVariant::aggregation_sources, 3);
    model.sources.rates = {{1, 1.0}};
    eval_rhs(model, n, ws, out);
    CHECK(std::abs(out[0]) <= 1e-14);
    CHECK(out[1] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("zero state with sources returns the sources") {
    auto model = constant_kernel_model(ModelVariant::aggregation_sources, 3);
    model.sources.rates = {{2, 0.25}};
    eval_rhs(model, std::vector<double>{0.0, 0.0, 0.0}, ws, out);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 0.25);
    CHECK(out[2] == 0.0);
  }
}

TEST_CASE("shattering with lambda = 0 equals pure aggregation") {
  std::mt19937_64 rng(23);
  const std::size_t m = 48;
  auto shatter = constant_kernel_model(ModelVariant::aggregation_shattering, m);
  shatter.shatter_rate = 0.0;
  const auto plain = constant_kernel_model(ModelVariant::aggregation, m);
  RhsWorkspace ws1, ws2;
  std::vector<double> a(m), b(m);
  for (int rep = 0; rep < 5; ++rep) {
    const auto n = random_state(rng, m);
    eval_rhs(shatter, n, ws1, a);
    eval_rhs(plain, n, ws2, b);
    CHECK(rel_max_diff(a, b) <= 1e-14);
  }
}

TEST_CASE("low-rank path agrees with the dense oracle") {
  std::mt19937_64 rng(29);
  const KernelSpec specs[] = {
      {KernelVariant::constant, 0.0, {}},
      {KernelVariant::generalized_brownian, 1.0 / 3.0, {}},
      {KernelVariant::generalized_brownian, 0.95, {}},
  };
  for (std::size_t m : {std::size_t{16}, std::size_t{64}, std::size_t{256}}) {
    for (const auto& spec : specs) {
      for (auto variant : {ModelVariant::aggregation, ModelVariant::aggregation_sources,
                           ModelVariant::aggregation_shattering}) {
        ModelSpec fast;
        fast.variant = variant;
        fast.m = m;
        fast.kernel = build_factors(spec, m);
        ModelSpec ref = fast;
        ref.kernel = build_dense(spec, m);
        if (variant == ModelVariant::aggregation_sources) {
          fast.sources.rates = ref.sources.rates = {{1, 1.0}, {10, 0.1}};
        }
        if (variant == ModelVariant::aggregation_shattering) {
          fast.shatter_rate = ref.shatter_rate = 0.01;
        }
        RhsWorkspace ws;
        std::vector<double> out(m);
        for (int rep = 0; rep < 5; ++rep) {
          const auto n = random_state(rng, m);
          eval_rhs(fast, n, ws, out);
          const auto want = eval_rhs_dense_oracle(ref, n);
          CHECK(rel_max_diff(out, want) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("dense production path agrees with the oracle too") {
  std::mt19937_64 rng(31);
  const std::size_t m = 64;
  ModelSpec model;
  model.variant = ModelVariant::aggregation_shattering;
  model.m = m;
  model.kernel = build_dense(KernelSpec{KernelVariant::free_molecular, 0.0, {}}, m);
  model.shatter_rate = 0.02;
  RhsWorkspace ws;
  std::vector<double> out(m);
  for (int rep = 0; rep < 5; ++rep) {
    const auto n = random_state(rng, m);
    eval_rhs(model, n, ws, out);
    const auto want = eval_rhs_dense_oracle(model, n);
    CHECK(rel_max_diff(out, want) <= 1e-13);
  }
}

TEST_CASE("aggregation mass flux equals the truncation leak") {
  std::mt19937_64 rng(37);
  const std::size_t m = 64;
  const KernelSpec spec{KernelVariant::generalized_brownian, 0.95, {}};
  ModelSpec model;
  model.variant = ModelVariant::aggregation;
  model.m = m;
  model.kernel = build_factors(spec, m);
  const auto dense = build_dense(spec, m);
  RhsWorkspace ws;
  std::vector<double> out(m);
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = random_state(rng, m);
    eval_rhs(model, n, ws, out);
    double flux = 0.0;
    for (std::size_t s = 1; s <= m; ++s) flux += static_cast<double>(s) * out[s - 1];
    double leak = 0.0;
    for (std::size_t i = 1; i <= m; ++i) {
      for (std::size_t j = m + 1 - i; j <= m; ++j) {
        leak += static_cast<double>(i + j) * dense.entry(i, j) * n[i - 1] * n[j - 1];
      }
    }
    leak *= -0.5;
    CHECK(std::abs(flux - leak) <= 1e-12 * std::abs(leak));
  }
}

TEST_CASE("birth and death are bilinear in the state") {
  std::mt19937_64 rng(41);
  const std::size_t m = 32;
  const auto kernel =
      KernelRep{build_factors(KernelSpec{KernelVariant::generalized_brownian, 0.3, {}}, m)};
  RhsWorkspace ws;
  const auto n = random_state(rng, m);
  std::vector<double> scaled(m), base(m), got(m);
  const double c = 3.25;
  for (std::size_t i = 0; i < m; ++i) scaled[i] = c * n[i];

  birth_term(kernel, n, ws, base);
  birth_term(kernel, scaled, ws, got);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(got[i] == doctest::Approx(c * c * base[i]).epsilon(1e-12));
  }
  death_term(kernel, n, ws, base);
  death_term(kernel, scaled, ws, got);
  for (std::size_t i = 0; i < m; ++i) {
    CHECK(got[i] == doctest::Approx(c * c * base[i]).epsilon(1e-12));
  }
}

TEST_CASE("workspace reuse is transparent and the counter counts") {
  std::mt19937_64 rng(43);
  const std::size_t m = 40;
  const auto model = constant_kernel_model(ModelVariant::aggregation, m);
  RhsWorkspace reused;
  CHECK(reused.evals() == 0);
  std::vector<double> a(m), b(m);
  for (int rep = 0; rep < 4; ++rep) {
    const auto n = random_state(rng, m);
    eval_rhs(model, n, reused, a);
    RhsWorkspace fresh;
    eval_rhs(model, n, fresh, b);
    for (std::size_t i = 0; i < m; ++i) CHECK(a[i] == b[i]);
  }
  CHECK(reused.evals() == 4);
  reused.reset_evals();
  CHECK(reused.evals() == 0);
}

TEST_CASE("size mismatches are rejected") {
  const auto model = constant_kernel_model(ModelVariant::aggregation, 8);
  RhsWorkspace ws;
  std::vector<double> out(8);
  CHECK_THROWS(eval_rhs(model, std::vector<double>(7, 0.0), ws, out));
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 8)};
  CHECK_THROWS(birth_term(kernel, std::vector<double>(9, 0.0), ws, out));
}

TEST_CASE("dense oracle guard") {
  ModelSpec model = constant_kernel_model(ModelVariant::aggregation, 8, true);
  CHECK_NOTHROW(eval_rhs_dense_oracle(model, std::vector<double>(8, 0.1)));
  CHECK_THROWS(eval_rhs_dense_oracle(constant_kernel_model(ModelVariant::aggregation, 8),
                                     std::vector<double>(8, 0.1)));  // low-rank kernel
}

TEST_CASE("Euler stability bound") {
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 8)};
  std::vector<double> n(8, 0.0);

  SUBCASE("row sum 2 with a = 1/4") {
    n[0] = 1.5;
    n[4] = 0.5;
    CHECK(euler_stability_bound(kernel, n, 0.25) == doctest::Approx(0.125).epsilon(1e-15));
  }
  SUBCASE("monodisperse with a = 1") {
    n[0] = 1.0;
    CHECK(euler_stability_bound(kernel, n, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("zero state is unbounded") {
    CHECK(std::isinf(euler_stability_bound(kernel, n, 0.25)));
  }
  SUBCASE("nonpositive a rejected") {
    n[0] = 1.0;
    CHECK_THROWS(euler_stability_bound(kernel, n, 0.0));
  }
}

}  // TEST_SUITE
