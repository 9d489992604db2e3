#include "aggkin/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aggkin {

namespace {

constexpr double kFallbackInitialTau = 0.01;

double pow_int(double base, int p) {
  double acc = 1.0;
  for (int i = 0; i < p; ++i) acc *= base;
  return acc;
}

}  // namespace

void SimulationConfig::validate() const {
  model.validate();
  control.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must be finite and >= 0");
  }
  if (record == RecordMode::interval && !(record_interval > 0.0)) {
    throw std::invalid_argument("interval recording needs record_interval > 0");
  }
  double prev = -1.0;
  for (double s : snapshot_times) {
    if (!(s >= 0.0) || s > t_end) {
      throw std::invalid_argument("snapshot times must lie in [0, t_end]");
    }
    if (s <= prev) throw std::invalid_argument("snapshot times must be strictly ascending");
    prev = s;
  }
  if (initial.kind == InitialKind::exponential && !(initial.scale > 0.0)) {
    throw std::invalid_argument("exponential initial condition needs scale > 0");
  }
  if (initial.kind == InitialKind::custom && initial.values.size() != model.m) {
    throw std::invalid_argument("custom initial state size does not match m");
  }
  if (initial_tau < 0.0 || !std::isfinite(initial_tau)) {
    throw std::invalid_argument("initial_tau must be finite and >= 0");
  }
}

std::vector<double> moments(std::span<const double> n, std::span<const int> orders) {
  std::vector<double> out;
  out.reserve(orders.size());
  for (int p : orders) {
    if (p < 0) throw std::invalid_argument("moment order must be >= 0");
    double acc = 0.0;
    for (std::size_t k = 1; k <= n.size(); ++k) {
      acc += pow_int(static_cast<double>(k), p) * n[k - 1];
    }
    out.push_back(acc);
  }
  return out;
}

double moment(std::span<const double> n, int order) {
  const int orders[1] = {order};
  return moments(n, orders)[0];
}

StateVector initial_state(const SimulationConfig& config) {
  config.validate();
  const std::size_t m = config.model.m;
  StateVector state;
  state.t = 0.0;
  switch (config.initial.kind) {
    case InitialKind::monodisperse:
      state.n.assign(m, 0.0);
      state.n[0] = 1.0;
      break;
    case InitialKind::exponential: {
      // n_k = A exp(-k/scale), A fixed so the total mass sum k n_k is 1.
      state.n.resize(m);
      double mass = 0.0;
      for (std::size_t k = 1; k <= m; ++k) {
        state.n[k - 1] = std::exp(-static_cast<double>(k) / config.initial.scale);
        mass += static_cast<double>(k) * state.n[k - 1];
      }
      for (double& x : state.n) x /= mass;
      break;
    }
    case InitialKind::custom:
      state.n = config.initial.values;
      break;
  }
  return state;
}

std::string describe(StepStatus status) {
  switch (status) {
    case StepStatus::ok:
      return "ok";
    case StepStatus::nonfinite_state:
      return "non-finite state";
    case StepStatus::too_many_rejects:
      return "step reject limit exceeded";
    case StepStatus::tau_underflow:
      return "step size underflow";
  }
  return "unknown";
}

RunReport run(const SimulationConfig& config) {
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();

  const std::size_t m = config.model.m;
  RhsWorkspace rhs_ws;
  StepperWorkspace step_ws;
  const RhsFn rhs = [&](std::span<const double> in, std::span<double> out) {
    eval_rhs(config.model, in, rhs_ws, out);
  };

  StateVector state = initial_state(config);
  double t = 0.0;

  RunReport report;
  const bool recording = config.record != RecordMode::none;
  double next_record_t = config.record_interval;

  auto push_record = [&](double tau_used, double err) {
    ObservableRecord rec;
    rec.t = t;
    rec.tau = tau_used;
    for (std::size_t k = 1; k <= m; ++k) {
      const double x = state.n[k - 1];
      const double kk = static_cast<double>(k);
      rec.density += x;
      rec.mass += kk * x;
      rec.m2 += kk * kk * x;
    }
    rec.error_estimate = err;
    rec.rhs_evals = rhs_ws.evals();
    rec.rejects = report.total_rejects;
    report.records.push_back(rec);
  };

  if (recording) push_record(0.0, std::numeric_limits<double>::quiet_NaN());

  std::size_t snap_idx = 0;
  auto take_due_snapshots = [&]() {
    while (snap_idx < config.snapshot_times.size() && config.snapshot_times[snap_idx] == t) {
      report.snapshots.emplace_back(t, state.n);
      ++snap_idx;
    }
  };
  take_due_snapshots();

  // The controller's running step proposal.
  double proposal;
  if (config.control.mode == StepMode::fixed) {
    proposal = config.control.tau;
  } else if (config.initial_tau > 0.0) {
    proposal = config.initial_tau;
  } else {
    proposal = euler_stability_bound(config.model.kernel, state.n, 0.25);
    if (!std::isfinite(proposal) || proposal <= 0.0) proposal = kFallbackInitialTau;
    if (config.t_end > 0.0) proposal = std::min(proposal, config.t_end);
  }

  while (t < config.t_end) {
    double t_target = config.t_end;
    if (snap_idx < config.snapshot_times.size() &&
        config.snapshot_times[snap_idx] < config.t_end) {
      t_target = config.snapshot_times[snap_idx];
    }
    const double remaining = t_target - t;
    // Land on the target when the proposal reaches it up to accumulated
    // rounding; otherwise repeated addition leaves sliver steps behind.
    const double slack = 1e-12 * std::max(1.0, std::abs(t_target));
    const bool shortened = remaining - proposal <= slack;
    const double tau_try = shortened ? remaining : proposal;

    StepOutcome outcome = advance(rhs, state.n, tau_try, config.control, step_ws);
    report.total_rhs_evals = rhs_ws.evals();
    if (!outcome.ok()) {
      report.termination = Termination::aborted;
      report.abort_reason = describe(outcome.status);
      report.abort_t = t;
      report.abort_tau = outcome.tau_used > 0.0 ? outcome.tau_used : tau_try;
      report.total_rejects += static_cast<std::uint64_t>(outcome.rejects);
      break;
    }

    state.n = std::move(outcome.state);
    report.total_rejects += static_cast<std::uint64_t>(outcome.rejects);
    report.total_accepted += 1;

    const bool landed = outcome.tau_used == tau_try;
    t = (landed && tau_try == remaining) ? t_target : t + outcome.tau_used;
    state.t = t;

    // A step shortened only to land on a boundary says nothing about
    // accuracy, so the standing proposal is kept; any internal rejection
    // re-engages the controller.
    if (config.control.mode == StepMode::adaptive && (!shortened || outcome.rejects > 0)) {
      proposal = outcome.tau_next;
    }

    if (config.record == RecordMode::every_step) {
      push_record(outcome.tau_used, outcome.error_estimate);
    } else if (config.record == RecordMode::interval && t >= next_record_t) {
      push_record(outcome.tau_used, outcome.error_estimate);
      next_record_t =
          config.record_interval * (std::floor(t / config.record_interval) + 1.0);
    }
    take_due_snapshots();
  }

  if (recording && report.termination == Termination::completed &&
      (report.records.empty() || report.records.back().t < t)) {
    push_record(0.0, std::numeric_limits<double>::quiet_NaN());
  }

  report.final_state = state;
  report.total_rhs_evals = rhs_ws.evals();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

}  // namespace aggkin
