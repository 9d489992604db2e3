#include "aggkin/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aggkin/report_io.hpp"
#include "aggkin/simulator.hpp"

namespace aggkin {

namespace {

std::string cell_label(const BenchCell& cell) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%g",
                cell.mode == StepMode::fixed ? "fixed tau=" : "adaptive tol=", cell.value);
  return buf;
}

}  // namespace

std::vector<BenchResult> run_bench(const ExperimentConfig& config, int threads) {
  if (config.bench_schemes.empty() || config.bench_cells.empty()) {
    throw ConfigError("bench mode needs bench_schemes and bench_cells");
  }
  if (threads < 1) threads = 1;

  struct Job {
    StepperKind scheme;
    BenchCell cell;
  };
  std::vector<Job> jobs;
  for (StepperKind scheme : config.bench_schemes) {
    for (const BenchCell& cell : config.bench_cells) jobs.push_back({scheme, cell});
  }
  std::vector<BenchResult> results(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];

      ExperimentConfig cell_cfg = config;
      cell_cfg.stepper = job.scheme;
      cell_cfg.mode = job.cell.mode;
      if (job.cell.mode == StepMode::fixed) {
        cell_cfg.tau = job.cell.value;
        cell_cfg.tol = 0.0;
      } else {
        cell_cfg.tol = job.cell.value;
        cell_cfg.tau = 0.0;
      }
      // timings are pure integration: no recording, no snapshots
      cell_cfg.record = RecordMode::none;
      cell_cfg.record_interval = 0.0;
      cell_cfg.snapshots.clear();

      BenchResult& res = results[idx];
      res.scheme = job.scheme;
      res.cell = job.cell;
      try {
        const RunReport report = run(to_simulation_config(cell_cfg));
        res.rhs_evals = report.total_rhs_evals;
        res.accepted = report.total_accepted;
        res.rejected = report.total_rejects;
        res.wall_seconds = report.wall_seconds;
        res.completed = report.termination == Termination::completed;
        if (!res.completed) {
          char buf[64];
          std::snprintf(buf, sizeof buf, " at t=%g", report.abort_t);
          res.note = report.abort_reason + buf;
        }
      } catch (const std::exception& e) {
        res.completed = false;
        res.note = e.what();
      }
    }
  };

  const int pool = std::min<int>(threads, static_cast<int>(jobs.size()));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> team;
    team.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) team.emplace_back(worker);
    for (auto& th : team) th.join();
  }
  return results;
}

std::string format_bench_table(const ExperimentConfig& config,
                               const std::vector<BenchResult>& results) {
  const std::size_t cols = config.bench_cells.size();
  std::vector<std::string> headers;
  headers.push_back("scheme");
  for (const auto& cell : config.bench_cells) headers.push_back(cell_label(cell));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < config.bench_schemes.size(); ++r) {
    std::vector<std::string> row;
    row.push_back(to_string(config.bench_schemes[r]));
    for (std::size_t c = 0; c < cols; ++c) {
      const BenchResult& res = results[r * cols + c];
      if (res.completed) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3f / %llu", res.wall_seconds,
                      static_cast<unsigned long long>(res.rhs_evals));
        row.push_back(buf);
      } else {
        row.push_back("aborted: " + res.note);
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    widths[c] = headers[c].size();
    for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c] << std::string(widths[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  };
  emit(headers);
  for (const auto& row : rows) emit(row);
  return out.str();
}

void write_bench_outputs(const ExperimentConfig& config,
                         const std::vector<BenchResult>& results,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    const auto path = dir / "bench_table.txt";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << format_bench_table(config, results);
  }
  {
    const auto path = dir / "bench_results.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "scheme,mode,value,rhs_evals,accepted,rejected,wall_seconds,status\n";
    for (const auto& res : results) {
      out << to_string(res.scheme) << ','
          << (res.cell.mode == StepMode::fixed ? "fixed" : "adaptive") << ','
          << format_full(res.cell.value) << ',' << res.rhs_evals << ',' << res.accepted << ','
          << res.rejected << ',' << format_full(res.wall_seconds) << ','
          << (res.completed ? "completed" : "aborted: " + res.note) << '\n';
    }
  }
  // grid mirrors of the table: rows = schemes, columns = cells
  const std::size_t cols = config.bench_cells.size();
  for (const char* which : {"evals", "seconds"}) {
    const auto path = dir / (std::string("bench_") + which + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "scheme";
    for (const auto& cell : config.bench_cells) out << ',' << cell_label(cell);
    out << '\n';
    for (std::size_t r = 0; r < config.bench_schemes.size(); ++r) {
      out << to_string(config.bench_schemes[r]);
      for (std::size_t c = 0; c < cols; ++c) {
        const BenchResult& res = results[r * cols + c];
        out << ',';
        if (!res.completed) {
          out << "aborted";
        } else if (std::string(which) == "evals") {
          out << res.rhs_evals;
        } else {
          out << format_full(res.wall_seconds);
        }
      }
      out << '\n';
    }
  }
}

}  // namespace aggkin
