#pragma once

#include <array>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace aggkin {

// Autonomous right-hand side: out = S(n).
using RhsFn = std::function<void(std::span<const double>, std::span<double>)>;

enum class StepperKind { rk2, rk4, rkf45 };

enum class StepMode { fixed, adaptive };

struct StepControl {
  StepperKind stepper = StepperKind::rkf45;
  StepMode mode = StepMode::adaptive;
  double tau = 0.0;  // fixed mode step
  double tol = 1e-6;  // adaptive mode tolerance
  // Safety factor in the step update; 0 selects the per-rule default
  // (1/4 for step doubling, 0.9 for the embedded pair).
  double safety = 0.0;
  double growth_max = 2.0;  // per-trial clamp on tau growth
  double shrink_min = 0.5;  // per-trial clamp on tau shrink
  double tau_min = 1e-12;   // below this the integration aborts
  int max_rejects = 40;
  // Scale the error estimate by max(1, ||candidate||_2) instead of using the
  // plain Euclidean norm. Off by default.
  bool relative_error = false;

  double effective_safety() const;
  void validate() const;
};

enum class StepStatus { ok, nonfinite_state, too_many_rejects, tau_underflow };

struct StepOutcome {
  std::vector<double> state;
  double tau_used = 0.0;
  double tau_next = 0.0;
  double error_estimate = std::numeric_limits<double>::quiet_NaN();  // NaN = not available
  int rejects = 0;
  int rhs_evals = 0;
  StepStatus status = StepStatus::ok;

  bool ok() const { return status == StepStatus::ok; }
};

// Stage storage sized once per trajectory.
struct StepperWorkspace {
  std::vector<double> k1, k2, k3, k4, k5, k6, stage, full, mid, half;

  void resize(std::size_t m);
};

// Fehlberg embedded-pair coefficients.
namespace rkf {
inline constexpr double a21 = 1.0 / 4.0;
inline constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
inline constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
inline constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                        a54 = -845.0 / 4104.0;
inline constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                        a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
// fifth-order weights
inline constexpr std::array<double, 6> b5 = {16.0 / 135.0,      0.0,         6656.0 / 12825.0,
                                             28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0};
// fourth-order weights (the accepted combination)
inline constexpr std::array<double, 6> b4 = {25.0 / 216.0,     0.0,        1408.0 / 2565.0,
                                             2197.0 / 4104.0, -1.0 / 5.0, 0.0};
}  // namespace rkf

// Step multiplier of the Fehlberg rule: safety * (tol/err)^(1/5).
double fehlberg_step_factor(double tol, double err, double safety);

// Single explicit steps. Stage values are written into the workspace; the
// result goes to `out`. They do not check finiteness; callers do.
void rk2_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out,
              StepperWorkspace& ws);
void rk4_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out,
              StepperWorkspace& ws);
// Six-stage embedded pair; fills the fourth-order state (the one a run keeps)
// and the fifth-order state, returns ||n5 - n4||_2.
double rkf45_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out4,
                  std::span<double> out5, StepperWorkspace& ws);

// One step of the chosen scheme at exactly tau. The error estimate is
// reported for rkf45 only.
StepOutcome fixed_step(const RhsFn& rhs, std::span<const double> n, double tau, StepperKind kind,
                       StepperWorkspace& ws);

// Local-error control by step doubling for rk2/rk4: one tau step against two
// tau/2 steps, reject and halve while the difference norm exceeds tol, accept
// the two-half-step state, and propose
//   tau_next = safety * tau * (tol/err)^(1/p)
// clamped per trial to [shrink_min, growth_max] * tau.
StepOutcome step_doubling_adaptive(const RhsFn& rhs, std::span<const double> n, double tau,
                                   const StepControl& control, StepperWorkspace& ws);

// Embedded-pair control for rkf45: accept the fourth-order state once
// ||n5 - n4|| <= tol, scaling tau by fehlberg_step_factor on every trial.
StepOutcome fehlberg_adaptive(const RhsFn& rhs, std::span<const double> n, double tau,
                              const StepControl& control, StepperWorkspace& ws);

// Dispatch on control.mode / control.stepper.
StepOutcome advance(const RhsFn& rhs, std::span<const double> n, double tau,
                    const StepControl& control, StepperWorkspace& ws);

}  // namespace aggkin
