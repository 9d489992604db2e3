#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aggkin/rhs.hpp"
#include "aggkin/steppers.hpp"

namespace aggkin {

enum class InitialKind { monodisperse, exponential, custom };

struct InitialCondition {
  InitialKind kind = InitialKind::monodisperse;
  double scale = 0.0;          // exponential: n_k proportional to exp(-k/scale)
  std::vector<double> values;  // custom
};

enum class RecordMode { every_step, interval, none };

struct SimulationConfig {
  ModelSpec model;
  StepControl control;
  double t_end = 0.0;
  InitialCondition initial;
  RecordMode record = RecordMode::every_step;
  double record_interval = 0.0;        // record = interval
  std::vector<double> snapshot_times;  // ascending, within [0, t_end]
  // Warm start for adaptive mode; 0 picks the Euler stability bound with
  // a = 1/4 at t = 0 (falling back to 0.01 when that is unbounded).
  double initial_tau = 0.0;

  void validate() const;
};

struct ObservableRecord {
  double t = 0.0;
  double tau = 0.0;                // step that produced this state (0 at t=0)
  double density = 0.0;            // N  = sum n_k
  double mass = 0.0;               // M1 = sum k n_k
  double m2 = 0.0;                 // M2 = sum k^2 n_k
  double error_estimate = 0.0;     // NaN when the scheme provides none
  std::uint64_t rhs_evals = 0;     // cumulative
  std::uint64_t rejects = 0;       // cumulative
};

enum class Termination { completed, aborted };

struct RunReport {
  std::vector<ObservableRecord> records;
  std::vector<std::pair<double, std::vector<double>>> snapshots;
  StateVector final_state;
  Termination termination = Termination::completed;
  std::string abort_reason;  // empty when completed
  double abort_t = 0.0;
  double abort_tau = 0.0;
  std::uint64_t total_rhs_evals = 0;
  std::uint64_t total_accepted = 0;
  std::uint64_t total_rejects = 0;
  double wall_seconds = 0.0;
};

/// sum_k k^p n_k for each requested order p.
std::vector<double> moments(std::span<const double> n, std::span<const int> orders);
double moment(std::span<const double> n, int order);

StateVector initial_state(const SimulationConfig& config);

// Integrate from t = 0 to t_end. Steps are shortened to land exactly on
// every snapshot time and on t_end; the controller's step proposal survives
// such interruptions unchanged.
RunReport run(const SimulationConfig& config);

std::string describe(StepStatus status);

}  // namespace aggkin
