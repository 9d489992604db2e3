// Acceptance suite: one check per numbered criterion, each printing a single
// pass/fail line. Run with no arguments for the full battery, `--only N` for
// one criterion, `--list` for the catalogue.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "aggkin/analysis.hpp"
#include "aggkin/rhs.hpp"
#include "aggkin/simulator.hpp"
#include "aggkin/steppers.hpp"

using namespace aggkin;

namespace {

struct Criterion {
  int number;
  const char* name;
  std::function<bool(std::string&)> check;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

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

ModelSpec make_model(ModelVariant variant, const KernelSpec& kspec, std::size_t m, bool dense) {
  ModelSpec model;
  model.variant = variant;
  model.m = m;
  model.kernel = dense ? KernelRep{build_dense(kspec, m)} : KernelRep{build_factors(kspec, m)};
  if (variant == ModelVariant::aggregation_sources) {
    model.sources.rates = {{1, 1.0}, {std::min<std::size_t>(m / 2, 100), 0.1}};
  }
  if (variant == ModelVariant::aggregation_shattering) model.shatter_rate = 0.01;
  return model;
}

SimulationConfig sources_recipe(std::size_t m, StepperKind stepper, StepMode mode, double value) {
  SimulationConfig cfg;
  cfg.model.variant = ModelVariant::aggregation_sources;
  cfg.model.m = m;
  cfg.model.kernel = build_factors(KernelSpec{}, m);
  cfg.model.sources.rates = {{1, 1.0}, {100, 0.1}};
  cfg.control.stepper = stepper;
  cfg.control.mode = mode;
  if (mode == StepMode::fixed) {
    cfg.control.tau = value;
  } else {
    cfg.control.tol = value;
  }
  cfg.t_end = 1000.0;
  cfg.record = RecordMode::none;
  return cfg;
}

// 1. Constant-kernel trajectory against the closed form
// n_k(t) = 4/(t+2)^2 * (t/(t+2))^(k-1), N(t) = 2/(t+2).
bool criterion_analytic_trajectory(std::string& detail) {
  SimulationConfig cfg;
  cfg.model.variant = ModelVariant::aggregation;
  cfg.model.m = 256;
  cfg.model.kernel = build_factors(KernelSpec{}, 256);
  cfg.control.stepper = StepperKind::rk4;
  cfg.control.mode = StepMode::adaptive;
  cfg.control.tol = 1e-8;
  cfg.t_end = 10.0;
  cfg.record = RecordMode::none;
  cfg.snapshot_times = {1.0, 2.0, 5.0, 10.0};
  const auto report = run(cfg);
  if (report.termination != Termination::completed) {
    detail = "run aborted: " + report.abort_reason;
    return false;
  }
  double worst = 0.0;
  for (const auto& [t, n] : report.snapshots) {
    for (std::size_t k = 1; k <= 20; ++k) {
      const double exact =
          4.0 / ((t + 2.0) * (t + 2.0)) * std::pow(t / (t + 2.0), static_cast<double>(k - 1));
      worst = std::max(worst, std::abs(n[k - 1] - exact) / exact);
    }
  }
  const double density_err = std::abs(moment(report.final_state.n, 0) - 1.0 / 6.0);
  detail = fmt("max rel err (k<=20) %.3e <= 1e-6, |N(10)-1/6| = %.3e <= 1e-7", worst,
               density_err);
  return worst <= 1e-6 && density_err <= 1e-7;
}

// 2. Low-rank path vs the literal dense sums across all variants/kernels/sizes.
bool criterion_oracle_equivalence(std::string& detail) {
  std::mt19937_64 rng(20240901);
  const KernelSpec specs[] = {
      {KernelVariant::constant, 0.0, {}},
      {KernelVariant::generalized_brownian, 1.0 / 3.0, {}},
      {KernelVariant::generalized_brownian, 0.95, {}},
  };
  double worst = 0.0;
  for (std::size_t m : {std::size_t{16}, std::size_t{64}, std::size_t{256}, std::size_t{1024}}) {
    for (const auto& spec : specs) {
      for (auto variant : {ModelVariant::aggregation, ModelVariant::aggregation_sources,
                           ModelVariant::aggregation_shattering}) {
        const ModelSpec fast = make_model(variant, spec, m, false);
        const ModelSpec ref = make_model(variant, spec, m, true);
        RhsWorkspace ws;
        std::vector<double> out(m);
        for (int rep = 0; rep < 20; ++rep) {
          const auto n = random_state(rng, m);
          eval_rhs(fast, n, ws, out);
          worst = std::max(worst, rel_max_diff(out, eval_rhs_dense_oracle(ref, n)));
        }
      }
    }
  }
  detail = fmt("max relative max-norm deviation %.3e <= 1e-12", worst);
  return worst <= 1e-12;
}

// 3. Mass bookkeeping: aggregation flux equals the truncation leak, and the
// shattering sub-operator moves no mass at all.
bool criterion_mass_flux(std::string& detail) {
  std::mt19937_64 rng(20240902);
  const std::size_t m = 64;
  const KernelSpec spec{KernelVariant::generalized_brownian, 1.0 / 3.0, {}};
  const ModelSpec model = make_model(ModelVariant::aggregation, spec, m, false);
  const DenseKernel dense = build_dense(spec, m);
  RhsWorkspace ws;
  std::vector<double> out(m), shat(m);
  double worst_leak = 0.0, worst_shat = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
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
    worst_leak = std::max(worst_leak, std::abs(flux - leak) / std::abs(leak));

    shattering_terms(model.kernel, n, 0.01, ws, shat);
    double sflux = 0.0;
    for (std::size_t s = 1; s <= m; ++s) sflux += static_cast<double>(s) * shat[s - 1];
    worst_shat = std::max(worst_shat, std::abs(sflux) / std::abs(shat[0]));
  }
  detail = fmt("leak identity defect %.3e, shattering flux %.3e, both <= 1e-12", worst_leak,
               worst_shat);
  return worst_leak <= 1e-12 && worst_shat <= 1e-12;
}

// 4. The embedded-pair step factor at its three reference operating points,
// plus err <= tol on every accepted step of a full sources run.
bool criterion_controller_rules(std::string& detail) {
  // factor = 0.9 (tol/err)^(1/5), recomputed here independently
  const double f_double = fehlberg_step_factor(1.0, 2.0, 0.9);
  const double f_half = fehlberg_step_factor(1.0, 0.5, 0.9);
  const double f_equal = fehlberg_step_factor(1.0, 1.0, 0.9);
  const double want_double = 0.9 * std::pow(0.5, 0.2);  // a 21.65% reduction
  const double want_half = 0.9 * std::pow(2.0, 0.2);    // a 3.38% increase
  const bool anchors_ok = std::abs(f_double - want_double) <= 0.005 &&
                          std::abs(f_half - want_half) <= 0.005 &&
                          std::abs(f_equal - 0.9) <= 0.005;

  auto cfg = sources_recipe(1024, StepperKind::rkf45, StepMode::adaptive, 1e-6);
  cfg.record = RecordMode::every_step;
  const auto report = run(cfg);
  bool bounded = report.termination == Termination::completed;
  double worst = 0.0;
  for (std::size_t i = 1; i < report.records.size(); ++i) {
    const double err = report.records[i].error_estimate;
    if (std::isnan(err)) continue;
    worst = std::max(worst, err);
    bounded = bounded && err <= cfg.control.tol;
  }
  detail = fmt("factors %+.2f%%/", 100.0 * (f_double - 1.0)) +
           fmt("%+.2f%%/", 100.0 * (f_half - 1.0)) + fmt("%+.2f%%", 100.0 * (f_equal - 1.0)) +
           fmt(" vs rule, max accepted err %.3e <= 1e-6 over %g accepted steps", worst,
               static_cast<double>(report.total_accepted));
  return anchors_ok && bounded;
}

// 5. Convergence orders on dn/dt = -n.
bool criterion_convergence_orders(std::string& detail) {
  const RhsFn decay = [](std::span<const double> n, std::span<double> out) {
    for (std::size_t i = 0; i < n.size(); ++i) out[i] = -n[i];
  };
  const std::vector<double> taus{0.1, 0.05, 0.025, 0.0125};

  auto fitted_order = [&](StepperKind kind) {
    std::vector<double> errs;
    for (double tau : taus) {
      StepperWorkspace ws;
      std::vector<double> n{1.0}, out(1);
      const int steps = static_cast<int>(std::round(1.0 / tau));
      for (int i = 0; i < steps; ++i) {
        if (kind == StepperKind::rk2) {
          rk2_step(decay, n, tau, out, ws);
        } else {
          rk4_step(decay, n, tau, out, ws);
        }
        n = out;
      }
      errs.push_back(std::abs(n[0] - std::exp(-1.0)));
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < errs.size(); ++i) acc += std::log2(errs[i - 1] / errs[i]);
    return acc / static_cast<double>(errs.size() - 1);
  };
  const double p2 = fitted_order(StepperKind::rk2);
  const double p4 = fitted_order(StepperKind::rk4);

  // local embedded estimate scales like tau^5
  std::vector<double> est;
  for (double tau : taus) {
    StepperWorkspace ws;
    std::vector<double> n4(1), n5(1);
    est.push_back(rkf45_step(decay, std::vector<double>{1.0}, tau, n4, n5, ws));
  }
  double p5 = 0.0;
  for (std::size_t i = 1; i < est.size(); ++i) p5 += std::log2(est[i - 1] / est[i]);
  p5 /= static_cast<double>(est.size() - 1);

  detail = fmt("measured orders rk2 %.3f, rk4 %.3f, rkf45 estimate %.3f", p2, p4, p5);
  return std::abs(p2 - 2.0) <= 0.3 && std::abs(p4 - 4.0) <= 0.3 && std::abs(p5 - 5.0) <= 0.5;
}

// 6. Steady-state scaling of the two-source run.
bool criterion_steady_state_scaling(std::string& detail) {
  auto cfg = sources_recipe(8192, StepperKind::rkf45, StepMode::adaptive, 1e-6);
  cfg.snapshot_times = {1000.0};
  const auto report = run(cfg);
  if (report.termination != Termination::completed) {
    detail = "run aborted: " + report.abort_reason;
    return false;
  }
  const auto fit = fit_power_law(report.snapshots[0].second, 200, 2000);
  detail = fmt("fitted beta %.4f (residual %.3f), required 1.5 +- 0.15", fit.beta,
               fit.residual_rms);
  return std::abs(fit.beta - 1.5) <= 0.15;
}

// 7. Adaptive vs fixed cost on the same physics.
bool criterion_efficiency_ratio(std::string& detail) {
  const auto adaptive = run(sources_recipe(4096, StepperKind::rkf45, StepMode::adaptive, 1e-4));
  const auto fixed = run(sources_recipe(4096, StepperKind::rkf45, StepMode::fixed, 0.01));
  if (adaptive.termination != Termination::completed ||
      fixed.termination != Termination::completed) {
    detail = "a run aborted";
    return false;
  }
  const double ratio = static_cast<double>(fixed.total_rhs_evals) /
                       static_cast<double>(adaptive.total_rhs_evals);
  const double n_adaptive = moment(adaptive.final_state.n, 0);
  const double n_fixed = moment(fixed.final_state.n, 0);
  const double drift = std::abs(n_adaptive - n_fixed) / n_fixed;
  detail = fmt("evals %.0f fixed", static_cast<double>(fixed.total_rhs_evals)) +
           fmt(" vs %.0f adaptive", static_cast<double>(adaptive.total_rhs_evals)) +
           fmt(" (%.0fx >= 20x), final N rel diff %.2e <= 1e-3", ratio, drift);
  return ratio >= 20.0 && drift <= 1e-3;
}

// 8. Slow relaxation with growing steps and the cutoff-compensated exponent.
bool criterion_relaxation(std::string& detail) {
  SimulationConfig cfg;
  cfg.model.variant = ModelVariant::aggregation_shattering;
  cfg.model.m = 4096;
  cfg.model.kernel = build_factors(KernelSpec{}, 4096);
  cfg.model.shatter_rate = 0.01;
  cfg.control.stepper = StepperKind::rk4;
  cfg.control.mode = StepMode::adaptive;
  cfg.control.tol = 1e-6;
  cfg.t_end = 5000.0;
  cfg.record = RecordMode::every_step;
  cfg.snapshot_times = {5000.0};
  const auto report = run(cfg);
  if (report.termination != Termination::completed) {
    detail = "run aborted: " + report.abort_reason;
    return false;
  }
  double tau_at_1 = 0.0;
  for (const auto& rec : report.records) {
    if (rec.t >= 1.0) {
      tau_at_1 = rec.tau;
      break;
    }
  }
  // the very last step is shortened to land on t_end, so read the step size
  // the controller actually runs near the end of the horizon
  double tau_late = 0.0;
  for (const auto& rec : report.records) {
    if (rec.t > 0.9 * cfg.t_end) tau_late = std::max(tau_late, rec.tau);
  }
  const double growth = tau_late / tau_at_1;
  // pre-cutoff fit window: bounded by 0.1/lambda^2 = 1000, clear of the
  // truncation pile-up that starts near m/4
  const auto fit = fit_cutoff(report.snapshots[0].second, 0.01, 10, 1000);
  detail = fmt("tau growth %.0fx >= 100x, cutoff-fit beta %.4f within 1.5 +- 0.2", growth,
               fit.beta);
  return growth >= 100.0 && std::abs(fit.beta - 1.5) <= 0.2;
}

// 9. Self-sustained oscillations of the total density with step cycling.
bool criterion_oscillations(std::string& detail) {
  SimulationConfig cfg;
  cfg.model.variant = ModelVariant::aggregation_shattering;
  cfg.model.m = 8192;
  cfg.model.kernel =
      build_factors(KernelSpec{KernelVariant::generalized_brownian, 0.95, {}}, 8192);
  cfg.model.shatter_rate = 0.01;
  cfg.control.stepper = StepperKind::rk2;
  cfg.control.mode = StepMode::adaptive;
  cfg.control.tol = 1e-6;
  cfg.t_end = 250.0;  // transient ends near t = 50, period is about 34
  cfg.record = RecordMode::every_step;
  const auto report = run(cfg);
  if (report.termination != Termination::completed) {
    detail = "run aborted: " + report.abort_reason;
    return false;
  }
  std::vector<double> t, density, tau;
  t.reserve(report.records.size());
  for (const auto& rec : report.records) {
    t.push_back(rec.t);
    density.push_back(rec.density);
    tau.push_back(rec.tau > 0.0 ? rec.tau : 1.0);
  }
  const auto osc = detect_oscillations(t, density, 0.01);
  if (osc.cycle_count < 3) {
    detail = fmt("only %.0f complete cycles, need >= 3", static_cast<double>(osc.cycle_count));
    return false;
  }
  const double first_amp = osc.amplitudes.front();
  const double last_amp = osc.amplitudes[osc.cycle_count - 1];  // last complete cycle
  double min_tau_span = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c + 1 < osc.peak_times.size(); ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] >= osc.peak_times[c] && t[i] <= osc.peak_times[c + 1]) {
        lo = std::min(lo, tau[i]);
        hi = std::max(hi, tau[i]);
      }
    }
    min_tau_span = std::min(min_tau_span, hi / lo);
  }
  detail = fmt("%.0f cycles, amplitude persistence %.2f >= 0.5, ",
               static_cast<double>(osc.cycle_count), last_amp / first_amp) +
           fmt("min per-cycle tau span %.1fx >= 10x", min_tau_span);
  return osc.cycle_count >= 3 && last_amp >= 0.5 * first_amp && min_tau_span >= 10.0;
}

// 10. The same system with a fixed step far above the stability limit must
// abort with a diagnostic instead of producing numbers.
bool criterion_instability(std::string& detail) {
  SimulationConfig cfg;
  cfg.model.variant = ModelVariant::aggregation_shattering;
  cfg.model.m = 8192;
  cfg.model.kernel =
      build_factors(KernelSpec{KernelVariant::generalized_brownian, 0.95, {}}, 8192);
  cfg.model.shatter_rate = 0.01;
  cfg.control.stepper = StepperKind::rk2;
  cfg.control.mode = StepMode::fixed;
  cfg.control.tau = 0.05;  // stable integration needs roughly 2e-4 here
  cfg.t_end = 50.0;
  cfg.record = RecordMode::none;
  const auto report = run(cfg);
  const bool aborted = report.termination == Termination::aborted;
  const bool diagnosed = report.abort_reason.find("non-finite") != std::string::npos;
  detail = aborted ? "aborted at t = " + fmt("%.4g with '", report.abort_t) +
                         report.abort_reason + "'"
                   : "run unexpectedly completed";
  return aborted && diagnosed;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "constant-kernel trajectory matches the closed form", criterion_analytic_trajectory},
      {2, "fast path matches the dense oracle battery", criterion_oracle_equivalence},
      {3, "mass-flux identities", criterion_mass_flux},
      {4, "embedded-pair controller rules", criterion_controller_rules},
      {5, "convergence orders", criterion_convergence_orders},
      {6, "two-source steady-state scaling", criterion_steady_state_scaling},
      {7, "adaptive vs fixed efficiency", criterion_efficiency_ratio},
      {8, "shattering relaxation with growing steps", criterion_relaxation},
      {9, "aggregation-shattering oscillations", criterion_oscillations},
      {10, "instability baseline aborts loudly", criterion_instability},
  };

  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& c : criteria) std::printf("%2d  %s\n", c.number, c.name);
      return 0;
    }
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    }
  }

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d. %s (%s) [%.1f s]\n", pass ? "PASS" : "FAIL", c.number, c.name,
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
