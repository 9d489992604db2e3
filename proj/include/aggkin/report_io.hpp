#pragma once

#include <filesystem>
#include <string>

#include "aggkin/config.hpp"
#include "aggkin/simulator.hpp"

namespace aggkin {

/// Full-precision scientific formatting (17 significant digits).
std::string format_full(double x);

// Writes observables.csv, one snapshot_<t>.csv per snapshot, and summary.txt
// into `dir`. An aborted run additionally leaves an `aborted.marker` file
// carrying the diagnostic; partial outputs are retained.
void write_run_outputs(const RunReport& report, const std::filesystem::path& dir);

std::filesystem::path snapshot_filename(double t);

}  // namespace aggkin
