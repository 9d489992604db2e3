#include "aggkin/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aggkin/analysis.hpp"

namespace aggkin {

namespace {

void check_stream(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw std::runtime_error("cannot write output file: " + path.string());
}

}  // namespace

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::filesystem::path snapshot_filename(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  return std::string("snapshot_") + buf + ".csv";
}

void write_run_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    const auto path = dir / "observables.csv";
    std::ofstream out(path);
    check_stream(out, path);
    out << "t,tau,N,M1,M2,err,rhs_evals,rejects\n";
    for (const auto& rec : report.records) {
      out << format_full(rec.t) << ',' << format_full(rec.tau) << ','
          << format_full(rec.density) << ',' << format_full(rec.mass) << ','
          << format_full(rec.m2) << ',' << format_full(rec.error_estimate) << ','
          << rec.rhs_evals << ',' << rec.rejects << '\n';
    }
  }

  for (const auto& [t, n] : report.snapshots) {
    const auto path = dir / snapshot_filename(t);
    std::ofstream out(path);
    check_stream(out, path);
    out << "k,n_k\n";
    for (std::size_t k = 1; k <= n.size(); ++k) {
      out << k << ',' << format_full(n[k - 1]) << '\n';
    }
  }

  {
    const auto path = dir / "summary.txt";
    std::ofstream out(path);
    check_stream(out, path);
    const bool completed = report.termination == Termination::completed;
    out << "termination = " << (completed ? "completed" : "aborted") << '\n';
    if (!completed) {
      out << "abort_reason = " << report.abort_reason << '\n';
      out << "abort_t = " << format_full(report.abort_t) << '\n';
      out << "abort_tau = " << format_full(report.abort_tau) << '\n';
    }
    out << "final_t = " << format_full(report.final_state.t) << '\n';
    out << "total_rhs_evals = " << report.total_rhs_evals << '\n';
    out << "total_accepted = " << report.total_accepted << '\n';
    out << "total_rejects = " << report.total_rejects << '\n';
    if (report.records.size() >= 100) {
      std::vector<double> t, density;
      t.reserve(report.records.size());
      for (const auto& rec : report.records) {
        t.push_back(rec.t);
        density.push_back(rec.density);
      }
      const auto osc = detect_oscillations(t, density);
      out << "density_cycles = " << osc.cycle_count << '\n';
      if (osc.cycle_count > 0) {
        double mean = 0.0;
        for (double p : osc.periods) mean += p;
        mean /= static_cast<double>(osc.periods.size());
        out << "density_mean_period = " << format_full(mean) << '\n';
      }
    }
    out << "wall_seconds = " << format_full(report.wall_seconds) << '\n';
  }

  if (report.termination == Termination::aborted) {
    const auto path = dir / "aborted.marker";
    std::ofstream out(path);
    check_stream(out, path);
    out << report.abort_reason << " at t = " << format_full(report.abort_t)
        << ", tau = " << format_full(report.abort_tau) << '\n';
  }
}

}  // namespace aggkin
