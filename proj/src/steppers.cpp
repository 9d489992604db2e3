#include "aggkin/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aggkin {

namespace {

constexpr double kErrFloor = 1e-300;
// Entries below -kNegativeRejectFraction * ||n||_inf reject the step; milder
// transient negatives pass through (zeroing them would feed mass in).
constexpr double kNegativeRejectFraction = 1e-3;

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double l2_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double l2_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double x : a) acc += x * x;
  return std::sqrt(acc);
}

double linf_norm(std::span<const double> a) {
  double acc = 0.0;
  for (double x : a) acc = std::max(acc, std::abs(x));
  return acc;
}

bool has_rejectable_negative(std::span<const double> v) {
  const double floor = -kNegativeRejectFraction * linf_norm(v);
  for (double x : v) {
    if (x < floor) return true;
  }
  return false;
}

int evals_per_step(StepperKind kind) {
  switch (kind) {
    case StepperKind::rk2:
      return 2;
    case StepperKind::rk4:
      return 4;
    case StepperKind::rkf45:
      return 6;
  }
  return 0;
}

}  // namespace

double StepControl::effective_safety() const {
  if (safety > 0.0) return safety;
  return stepper == StepperKind::rkf45 ? 0.9 : 0.25;
}

void StepControl::validate() const {
  if (mode == StepMode::fixed && !(tau > 0.0)) {
    throw std::invalid_argument("fixed mode needs tau > 0");
  }
  if (mode == StepMode::adaptive && !(tol > 0.0)) {
    throw std::invalid_argument("adaptive mode needs tol > 0");
  }
  if (safety < 0.0 || safety >= 1.0) {
    throw std::invalid_argument("safety factor must be in (0,1), or 0 for the default");
  }
  if (!(tau_min > 0.0)) throw std::invalid_argument("tau_min must be > 0");
  if (!(shrink_min < 1.0 && 1.0 < growth_max)) {
    throw std::invalid_argument("clamps must satisfy shrink_min < 1 < growth_max");
  }
  if (max_rejects < 1) throw std::invalid_argument("max_rejects must be >= 1");
}

void StepperWorkspace::resize(std::size_t m) {
  for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &stage, &full, &mid, &half}) {
    if (v->size() != m) v->assign(m, 0.0);
  }
}

double fehlberg_step_factor(double tol, double err, double safety) {
  return safety * std::pow(tol / std::max(err, kErrFloor), 0.2);
}

void rk2_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out,
              StepperWorkspace& ws) {
  const std::size_t m = n.size();
  ws.resize(m);
  rhs(n, ws.k1);
  for (std::size_t i = 0; i < m; ++i) ws.stage[i] = n[i] + tau * ws.k1[i];
  rhs(ws.stage, ws.k2);
  for (std::size_t i = 0; i < m; ++i) out[i] = n[i] + 0.5 * tau * (ws.k1[i] + ws.k2[i]);
}

void rk4_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out,
              StepperWorkspace& ws) {
  const std::size_t m = n.size();
  ws.resize(m);
  rhs(n, ws.k1);
  for (std::size_t i = 0; i < m; ++i) ws.stage[i] = n[i] + 0.5 * tau * ws.k1[i];
  rhs(ws.stage, ws.k2);
  for (std::size_t i = 0; i < m; ++i) ws.stage[i] = n[i] + 0.5 * tau * ws.k2[i];
  rhs(ws.stage, ws.k3);
  for (std::size_t i = 0; i < m; ++i) ws.stage[i] = n[i] + tau * ws.k3[i];
  rhs(ws.stage, ws.k4);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = n[i] + tau * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]) / 6.0;
  }
}

double rkf45_step(const RhsFn& rhs, std::span<const double> n, double tau, std::span<double> out4,
                  std::span<double> out5, StepperWorkspace& ws) {
  using namespace rkf;
  const std::size_t m = n.size();
  ws.resize(m);
  rhs(n, ws.k1);
  for (std::size_t i = 0; i < m; ++i) ws.stage[i] = n[i] + tau * a21 * ws.k1[i];
  rhs(ws.stage, ws.k2);
  for (std::size_t i = 0; i < m; ++i) {
    ws.stage[i] = n[i] + tau * (a31 * ws.k1[i] + a32 * ws.k2[i]);
  }
  rhs(ws.stage, ws.k3);
  for (std::size_t i = 0; i < m; ++i) {
    ws.stage[i] = n[i] + tau * (a41 * ws.k1[i] + a42 * ws.k2[i] + a43 * ws.k3[i]);
  }
  rhs(ws.stage, ws.k4);
  for (std::size_t i = 0; i < m; ++i) {
    ws.stage[i] = n[i] + tau * (a51 * ws.k1[i] + a52 * ws.k2[i] + a53 * ws.k3[i] + a54 * ws.k4[i]);
  }
  rhs(ws.stage, ws.k5);
  for (std::size_t i = 0; i < m; ++i) {
    ws.stage[i] = n[i] + tau * (a61 * ws.k1[i] + a62 * ws.k2[i] + a63 * ws.k3[i] +
                                a64 * ws.k4[i] + a65 * ws.k5[i]);
  }
  rhs(ws.stage, ws.k6);
  double err2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    out5[i] = n[i] + tau * (b5[0] * ws.k1[i] + b5[2] * ws.k3[i] + b5[3] * ws.k4[i] +
                            b5[4] * ws.k5[i] + b5[5] * ws.k6[i]);
    out4[i] = n[i] + tau * (b4[0] * ws.k1[i] + b4[2] * ws.k3[i] + b4[3] * ws.k4[i] +
                            b4[4] * ws.k5[i]);
    const double d = out5[i] - out4[i];
    err2 += d * d;
  }
  return std::sqrt(err2);
}

StepOutcome fixed_step(const RhsFn& rhs, std::span<const double> n, double tau, StepperKind kind,
                       StepperWorkspace& ws) {
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be > 0");
  StepOutcome res;
  res.state.resize(n.size());
  ws.resize(n.size());  // before any ws member is handed out as a span
  res.tau_used = tau;
  res.tau_next = tau;
  res.rhs_evals = evals_per_step(kind);
  switch (kind) {
    case StepperKind::rk2:
      rk2_step(rhs, n, tau, res.state, ws);
      break;
    case StepperKind::rk4:
      rk4_step(rhs, n, tau, res.state, ws);
      break;
    case StepperKind::rkf45:
      res.error_estimate = rkf45_step(rhs, n, tau, res.state, ws.half, ws);
      break;
  }
  if (!all_finite(res.state)) {
    res.status = StepStatus::nonfinite_state;
    return res;
  }
  return res;
}

StepOutcome step_doubling_adaptive(const RhsFn& rhs, std::span<const double> n, double tau,
                                   const StepControl& control, StepperWorkspace& ws) {
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be > 0");
  const bool rk2 = control.stepper == StepperKind::rk2;
  if (!rk2 && control.stepper != StepperKind::rk4) {
    throw std::invalid_argument("step doubling applies to rk2 and rk4 only");
  }
  const double p = rk2 ? 2.0 : 4.0;
  const double safety = control.effective_safety();
  const int per_step = evals_per_step(control.stepper);
  const std::size_t m = n.size();
  ws.resize(m);

  StepOutcome res;
  for (;;) {
    if (tau < control.tau_min) {
      res.status = StepStatus::tau_underflow;
      res.tau_used = tau;
      return res;
    }
    auto one = rk2 ? rk2_step : rk4_step;
    one(rhs, n, tau, ws.full, ws);
    one(rhs, n, 0.5 * tau, ws.mid, ws);
    one(rhs, ws.mid, 0.5 * tau, ws.half, ws);
    res.rhs_evals += 3 * per_step;

    const bool finite = all_finite(ws.full) && all_finite(ws.half);
    double err;
    if (!finite) {
      err = std::numeric_limits<double>::infinity();
    } else {
      err = l2_diff(ws.half, ws.full);
      if (control.relative_error) err /= std::max(1.0, l2_norm(ws.half));
      if (has_rejectable_negative(ws.half)) err = std::numeric_limits<double>::infinity();
    }

    if (err > control.tol) {
      tau *= 0.5;
      if (++res.rejects > control.max_rejects) {
        res.status = finite ? StepStatus::too_many_rejects : StepStatus::nonfinite_state;
        res.tau_used = tau;
        return res;
      }
      continue;
    }

    // Accept the pair of half steps, the more accurate of the two results.
    // Small negative excursions pass through untouched; zeroing them would
    // feed mass into the system every step.
    res.state.assign(ws.half.begin(), ws.half.end());
    res.tau_used = tau;
    res.error_estimate = err;
    const double raw = safety * tau * std::pow(control.tol / std::max(err, kErrFloor), 1.0 / p);
    res.tau_next = std::clamp(raw, control.shrink_min * tau, control.growth_max * tau);
    return res;
  }
}

StepOutcome fehlberg_adaptive(const RhsFn& rhs, std::span<const double> n, double tau,
                              const StepControl& control, StepperWorkspace& ws) {
  if (!(tau > 0.0)) throw std::invalid_argument("step size must be > 0");
  if (control.stepper != StepperKind::rkf45) {
    throw std::invalid_argument("the embedded-pair rule applies to rkf45 only");
  }
  const double safety = control.effective_safety();
  const std::size_t m = n.size();
  ws.resize(m);

  StepOutcome res;
  for (;;) {
    if (tau < control.tau_min) {
      res.status = StepStatus::tau_underflow;
      res.tau_used = tau;
      return res;
    }
    double err = rkf45_step(rhs, n, tau, ws.full, ws.half, ws);  // full = n4, half = n5
    res.rhs_evals += 6;
    const bool finite = all_finite(ws.full) && all_finite(ws.half) && std::isfinite(err);
    if (!finite) {
      err = std::numeric_limits<double>::infinity();
    } else {
      if (control.relative_error) err /= std::max(1.0, l2_norm(ws.full));
      if (has_rejectable_negative(ws.full)) err = std::numeric_limits<double>::infinity();
    }

    const double factor = std::clamp(fehlberg_step_factor(control.tol, err, safety),
                                     control.shrink_min, control.growth_max);
    if (err > control.tol) {
      tau *= factor;
      if (++res.rejects > control.max_rejects) {
        res.status = finite ? StepStatus::too_many_rejects : StepStatus::nonfinite_state;
        res.tau_used = tau;
        return res;
      }
      continue;
    }

    res.state.assign(ws.full.begin(), ws.full.end());
    res.tau_used = tau;
    res.error_estimate = err;
    res.tau_next = factor * tau;
    return res;
  }
}

StepOutcome advance(const RhsFn& rhs, std::span<const double> n, double tau,
                    const StepControl& control, StepperWorkspace& ws) {
  if (control.mode == StepMode::fixed) return fixed_step(rhs, n, tau, control.stepper, ws);
  if (control.stepper == StepperKind::rkf45) {
    return fehlberg_adaptive(rhs, n, tau, control, ws);
  }
  return step_doubling_adaptive(rhs, n, tau, control, ws);
}

}  // namespace aggkin
