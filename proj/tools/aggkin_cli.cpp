#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aggkin/bench.hpp"
#include "aggkin/config.hpp"
#include "aggkin/report_io.hpp"
#include "aggkin/simulator.hpp"
#include "aggkin/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;
constexpr int kExitVerifyFailed = 4;

struct CommonOpts {
  std::string config_path;
  std::string output_override;
  bool quiet = false;
};

int cmd_run(const CommonOpts& opts) {
  aggkin::ExperimentConfig cfg;
  aggkin::SimulationConfig sim;
  try {
    cfg = aggkin::load_config(opts.config_path);
    sim = aggkin::to_simulation_config(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string out_dir = opts.output_override.empty() ? cfg.output : opts.output_override;

  const aggkin::RunReport report = aggkin::run(sim);
  aggkin::write_run_outputs(report, out_dir);

  if (report.termination == aggkin::Termination::aborted) {
    std::cerr << "integration aborted: " << report.abort_reason
              << " at t = " << aggkin::format_full(report.abort_t)
              << ", tau = " << aggkin::format_full(report.abort_tau) << '\n';
    std::cerr << "partial outputs in " << out_dir << " (see aborted.marker)\n";
    return kExitAborted;
  }
  if (!opts.quiet) {
    std::cout << "completed t = " << aggkin::format_full(report.final_state.t) << ", "
              << report.total_accepted << " steps, " << report.total_rejects << " rejects, "
              << report.total_rhs_evals << " rhs evals, outputs in " << out_dir << '\n';
  }
  return kExitOk;
}

int cmd_bench(const CommonOpts& opts, int threads) {
  aggkin::ExperimentConfig cfg;
  try {
    cfg = aggkin::load_config(opts.config_path);
    if (cfg.bench_schemes.empty() || cfg.bench_cells.empty()) {
      throw aggkin::ConfigError("bench mode needs bench_schemes and bench_cells");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  const std::string out_dir = opts.output_override.empty() ? cfg.output : opts.output_override;

  const auto results = aggkin::run_bench(cfg, threads);
  aggkin::write_bench_outputs(cfg, results, out_dir);
  if (!opts.quiet) std::cout << aggkin::format_bench_table(cfg, results);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aggregation-fragmentation kinetics with adaptive Runge-Kutta steps"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "integrate one configured system and write data files");
  run_cmd->add_option("--config", run_opts.config_path, "experiment config file")->required();
  run_cmd->add_option("--output", run_opts.output_override, "output directory (overrides config)");
  run_cmd->add_flag("--quiet", run_opts.quiet, "suppress the completion summary");

  CommonOpts bench_opts;
  int threads = 1;
  auto* bench_cmd =
      app.add_subcommand("bench", "time every configured scheme/step-rule combination");
  bench_cmd->add_option("--config", bench_opts.config_path, "experiment config file")->required();
  bench_cmd->add_option("--output", bench_opts.output_override,
                        "output directory (overrides config)");
  bench_cmd->add_option("--threads", threads, "concurrent bench cells")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--quiet", bench_opts.quiet, "do not print the table");

  bool verify_quiet = false;
  auto* verify_cmd = app.add_subcommand("verify", "run the built-in consistency checks");
  verify_cmd->add_flag("--quiet", verify_quiet, "print failures only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_opts);
    if (bench_cmd->parsed()) return cmd_bench(bench_opts, threads);
    if (verify_cmd->parsed()) {
      const int failures = aggkin::run_verification(std::cout, verify_quiet);
      if (failures > 0) {
        std::cerr << failures << " verification check(s) failed\n";
        return kExitVerifyFailed;
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
