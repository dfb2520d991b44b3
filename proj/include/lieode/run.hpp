#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lieode/config.hpp"
#include "lieode/training.hpp"

namespace lieode {

std::vector<double> linspace(double a, double b, int n);

// 17-significant-digit decimal: round-trips a double exactly.
std::string fmt17(double x);

// Outcome of a pipeline run; exit_code follows the CLI contract
// (0 success, 1 config error via ConfigError, 2 numerical failure).
struct TrainOutcome {
  int exit_code = 0;
  TrainReport report;
  double rmse_train = 0.0;
  double rmse_test = 0.0;
  bool has_rmse = false;
  std::string report_path;
  std::string error;  // non-empty when something failed
};

// Train, evaluate against an rk45 reference, and write
// trajectory.csv, extrapolation.csv, loss_history.csv, report.json
// into cfg.output_dir.  Artifacts are written even on failure.
TrainOutcome cmd_train(const ExperimentConfig& cfg);

// rk45 only; writes reference.csv on the union of train and test grids.
int cmd_reference(const ExperimentConfig& cfg);

// One training per method from identical seeds; writes
// loss_history_<method>.csv per method plus compare.json.
int cmd_compare(const ExperimentConfig& cfg, const std::vector<std::string>& methods);

// All four presets; writes per-preset artifacts under out_dir/<preset>/ and a
// summary table (bench.csv, bench.json) in out_dir.
int cmd_bench_all(const std::string& out_dir, std::uint64_t seed);

}  // namespace lieode
