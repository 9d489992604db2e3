#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aggkin/config.hpp"

namespace aggkin {

struct BenchResult {
  StepperKind scheme;
  BenchCell cell;
  std::uint64_t rhs_evals = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  double wall_seconds = 0.0;
  bool completed = false;
  std::string note;  // abort diagnostic when not completed
};

// Runs every (scheme, cell) combination of the config with recording
// disabled. Cells are independent; up to `threads` run concurrently. An
// aborted cell is reported in place and does not stop the others.
std::vector<BenchResult> run_bench(const ExperimentConfig& config, int threads = 1);

// Text table, rows = schemes, columns = cells, each entry seconds / evals.
std::string format_bench_table(const ExperimentConfig& config,
                               const std::vector<BenchResult>& results);

// Machine-readable mirror of the grid.
void write_bench_outputs(const ExperimentConfig& config,
                         const std::vector<BenchResult>& results,
                         const std::filesystem::path& dir);

}  // namespace aggkin
