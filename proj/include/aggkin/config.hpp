#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aggkin/simulator.hpp"

namespace aggkin {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One benchmark grid cell: fixed:<tau> or adaptive:<tol>.
struct BenchCell {
  StepMode mode = StepMode::adaptive;
  double value = 0.0;  // tau or tol

  bool operator==(const BenchCell&) const = default;
};

// Parsed form of the key = value experiment file. See README for the key
// reference. Unknown keys are rejected with the offending line number.
struct ExperimentConfig {
  ModelVariant model = ModelVariant::aggregation;
  KernelVariant kernel = KernelVariant::constant;
  double alpha = 0.0;
  std::string factors_path;
  std::size_t m = 0;
  double lambda = 0.0;
  std::vector<std::pair<std::size_t, double>> sources;
  InitialKind initial = InitialKind::monodisperse;
  double initial_scale = 0.0;
  StepperKind stepper = StepperKind::rkf45;
  StepMode mode = StepMode::adaptive;
  double tau = 0.0;
  double tol = 0.0;
  double tau0 = 0.0;
  double safety = 0.0;
  double growth_max = 2.0;
  double shrink_min = 0.5;
  double tau_min = 1e-12;
  int max_rejects = 40;
  bool relative_error = false;
  double t_end = 0.0;
  std::vector<double> snapshots;
  RecordMode record = RecordMode::every_step;
  double record_interval = 0.0;
  std::string output = "out";
  std::optional<std::uint64_t> seed;
  std::vector<StepperKind> bench_schemes;
  std::vector<BenchCell> bench_cells;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

// Builds the runnable configuration: kernel factors or dense table, step
// control, initial condition. Kernel representation is low-rank for exactly
// factorizable kernels and dense for free_molecular.
SimulationConfig to_simulation_config(const ExperimentConfig& config);

std::string to_string(StepperKind kind);
std::string to_string(ModelVariant variant);
std::string to_string(KernelVariant variant);

}  // namespace aggkin
