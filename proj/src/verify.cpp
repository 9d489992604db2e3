#include "aggkin/verify.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "aggkin/config.hpp"
#include "aggkin/rhs.hpp"
#include "aggkin/simulator.hpp"
#include "aggkin/steppers.hpp"

namespace aggkin {

namespace {

constexpr std::uint64_t kSeed = 0x5eed5eedULL;


std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::vector<double> random_state(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> n(m);
  for (double& x : n) x = uni(rng);
  return n;
}

double rel_max_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

ModelSpec make_model(ModelVariant variant, const KernelSpec& spec, std::size_t m,
                     bool dense) {
  ModelSpec model;
  model.variant = variant;
  model.m = m;
  if (dense) {
    model.kernel = build_dense(spec, m);
  } else {
    model.kernel = build_factors(spec, m);
  }
  if (variant == ModelVariant::aggregation_sources) {
    model.sources.rates = {{1, 1.0}, {std::min<std::size_t>(m, 10), 0.1}};
  }
  if (variant == ModelVariant::aggregation_shattering) model.shatter_rate = 0.01;
  return model;
}

bool check_oracle_equivalence(std::string& detail) {
  std::mt19937_64 rng(kSeed);
  const KernelSpec specs[] = {
      {KernelVariant::constant, 0.0, {}},
      {KernelVariant::generalized_brownian, 1.0 / 3.0, {}},
      {KernelVariant::generalized_brownian, 0.95, {}},
  };
  double worst = 0.0;
  for (std::size_t m : {std::size_t{16}, std::size_t{64}}) {
    for (const auto& spec : specs) {
      for (auto variant : {ModelVariant::aggregation, ModelVariant::aggregation_sources,
                           ModelVariant::aggregation_shattering}) {
        const ModelSpec fast = make_model(variant, spec, m, false);
        const ModelSpec ref = make_model(variant, spec, m, true);
        RhsWorkspace ws;
        std::vector<double> out(m);
        for (int rep = 0; rep < 5; ++rep) {
          const auto n = random_state(rng, m);
          eval_rhs(fast, n, ws, out);
          const auto oracle = eval_rhs_dense_oracle(ref, n);
          worst = std::max(worst, rel_max_diff(out, oracle));
        }
      }
    }
  }
  detail = "max relative deviation " + sci(worst);
  return worst <= 1e-12;
}

bool check_mass_flux(std::string& detail) {
  std::mt19937_64 rng(kSeed + 1);
  const std::size_t m = 64;
  const KernelSpec spec{KernelVariant::generalized_brownian, 1.0 / 3.0, {}};
  const ModelSpec model = make_model(ModelVariant::aggregation, spec, m, false);
  const DenseKernel dense = build_dense(spec, m);
  RhsWorkspace ws;
  std::vector<double> out(m);
  double worst = 0.0;
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
    worst = std::max(worst, std::abs(flux - leak) / std::abs(leak));
  }
  detail = "max relative defect " + sci(worst);
  return worst <= 1e-12;
}

bool check_shattering_neutrality(std::string& detail) {
  std::mt19937_64 rng(kSeed + 2);
  const std::size_t m = 64;
  const KernelSpec spec{KernelVariant::generalized_brownian, 0.95, {}};
  const auto kernel = KernelRep{build_factors(spec, m)};
  RhsWorkspace ws;
  std::vector<double> shat(m);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto n = random_state(rng, m);
    shattering_terms(kernel, n, 0.01, ws, shat);
    double flux = 0.0;
    double gross = std::abs(shat[0]);
    for (std::size_t s = 1; s <= m; ++s) flux += static_cast<double>(s) * shat[s - 1];
    worst = std::max(worst, std::abs(flux) / std::max(gross, 1e-30));
  }
  detail = "max relative flux " + sci(worst);
  return worst <= 1e-12;
}

bool check_tableau(std::string& detail) {
  double s4 = 0.0, s5 = 0.0;
  for (double w : rkf::b4) s4 += w;
  for (double w : rkf::b5) s5 += w;
  detail = "|sum(b4)-1| = " + sci(std::abs(s4 - 1.0)) + ", |sum(b5)-1| = " + sci(std::abs(s5 - 1.0));
  return std::abs(s4 - 1.0) <= 1e-15 && std::abs(s5 - 1.0) <= 1e-15;
}

bool check_constant_kernel_run(std::string& detail) {
  SimulationConfig sim;
  sim.model = make_model(ModelVariant::aggregation, KernelSpec{}, 256, false);
  sim.control.stepper = StepperKind::rk4;
  sim.control.mode = StepMode::adaptive;
  sim.control.tol = 1e-8;
  sim.t_end = 2.0;
  sim.record = RecordMode::none;
  const RunReport report = run(sim);
  if (report.termination != Termination::completed) {
    detail = "run aborted: " + report.abort_reason;
    return false;
  }
  const auto& n = report.final_state.n;
  const double t = 2.0;
  auto exact = [&](std::size_t k) {
    return 4.0 / ((t + 2.0) * (t + 2.0)) * std::pow(t / (t + 2.0), static_cast<double>(k - 1));
  };
  const double density = moment(n, 0);
  const double d_density = std::abs(density - 2.0 / (t + 2.0));
  const double d1 = std::abs(n[0] - exact(1));
  const double d2 = std::abs(n[1] - exact(2));
  detail = "|N-1/2| = " + sci(d_density) + ", |n1-1/4| = " + sci(d1) + ", |n2-1/8| = " + sci(d2);
  return d_density <= 1e-6 && d1 <= 1e-6 && d2 <= 1e-6;
}

bool check_euler_bound(std::string& detail) {
  const auto kernel = KernelRep{build_factors(KernelSpec{}, 8)};
  std::vector<double> n(8, 0.0);
  n[0] = 1.5;
  n[3] = 0.5;  // total 2 with the constant kernel: bound = 0.25 / 2
  const double bound = euler_stability_bound(kernel, n, 0.25);
  std::vector<double> zeros(8, 0.0);
  const double unbounded = euler_stability_bound(kernel, zeros, 0.25);
  detail = "bound = " + sci(bound);
  return std::abs(bound - 0.125) <= 1e-15 && std::isinf(unbounded);
}

}  // namespace

int run_verification(std::ostream& out, bool quiet) {
  struct Check {
    const char* name;
    bool (*fn)(std::string&);
  };
  const Check checks[] = {
      {"fast path matches literal sums", &check_oracle_equivalence},
      {"aggregation mass flux equals truncation leak", &check_mass_flux},
      {"shattering terms are mass-neutral", &check_shattering_neutrality},
      {"embedded-pair weight rows sum to one", &check_tableau},
      {"constant-kernel run matches analytic solution", &check_constant_kernel_run},
      {"Euler stability bound", &check_euler_bound},
  };
  int failures = 0;
  for (const auto& check : checks) {
    std::string detail;
    const bool pass = check.fn(detail);
    if (!pass) ++failures;
    if (!quiet || !pass) {
      out << (pass ? "[PASS] " : "[FAIL] ") << check.name << " (" << detail << ")\n";
    }
  }
  return failures;
}

}  // namespace aggkin
