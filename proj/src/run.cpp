#include "lieode/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <utility>

#include "lieode/integrate.hpp"
#include "lieode/net.hpp"
#include "lieode/trial.hpp"

namespace lieode {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1.0);
  return out;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_artifact(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
  return out;
}

// nets for one restart under the seed ladder: base + 1000*restart + component
std::vector<ScalarNet> nets_for(const ExperimentConfig& cfg, int dim, int restart) {
  std::vector<ScalarNet> nets;
  nets.reserve(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    nets.push_back(init_net(cfg.hidden_units,
                            cfg.seed + 1000 * static_cast<std::uint64_t>(restart) +
                                static_cast<std::uint64_t>(k)));
  }
  return nets;
}

Eigen::VectorXd flat_of(const std::vector<ScalarNet>& nets) {
  int total = 0;
  for (const auto& net : nets) total += net.param_count();
  Eigen::VectorXd p(total);
  int off = 0;
  for (const auto& net : nets) {
    p.segment(off, net.param_count()) = net.flatten();
    off += net.param_count();
  }
  return p;
}

TrialSolution make_trial(const Experiment& exp, const ExperimentConfig& cfg,
                         std::vector<ScalarNet> nets, const std::vector<double>& grid) {
  if (exp.literal_base) return TrialSolution(exp.base, std::move(nets), grid);
  return TrialSolution(exp.linear, exp.system.y0, std::move(nets), grid);
}

void write_loss_history(const fs::path& path, const TrainReport& report) {
  auto out = open_artifact(path);
  out << "iter,loss,grad_norm\n";
  for (const auto& row : report.loss_history) {
    out << row.iter << ',' << fmt17(row.loss) << ',' << fmt17(row.grad_norm) << '\n';
  }
}

void write_trajectory(const fs::path& path, const TrialSolution& trial,
                      const DenseSolution* reference, const std::vector<double>& grid) {
  auto out = open_artifact(path);
  const int n = trial.dim();
  out << 't';
  for (int k = 1; k <= n; ++k) out << ",yhat_" << k;
  for (int k = 1; k <= n; ++k) out << ",ref_" << k;
  out << '\n';
  for (const double t : grid) {
    const Eigen::VectorXd yhat = trial.eval_at(t).yhat;
    Eigen::VectorXd ref =
        Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    if (reference) ref = reference->at(t);
    out << fmt17(t);
    for (int k = 0; k < n; ++k) out << ',' << fmt17(yhat(k));
    for (int k = 0; k < n; ++k) out << ',' << fmt17(ref(k));
    out << '\n';
  }
}

LossFn wrap(ResidualLoss& loss) {
  return [&loss](const Eigen::VectorXd& p, Eigen::VectorXd& g) { return loss(p, g); };
}

TrainReport run_minimizer(const ExperimentConfig& cfg, ResidualLoss& loss,
                          const Eigen::VectorXd& p0, const InitFn& reinit) {
  OptimizerConfig opt = cfg.optimizer;
  opt.restarts = cfg.restarts;
  if (opt.method == "gradient_descent") return gd_minimize(wrap(loss), p0, opt, reinit);
  return bfgs_minimize(wrap(loss), p0, opt, reinit);
}

json report_json(const ExperimentConfig& cfg, const Experiment& exp,
                 const TrainOutcome& outcome) {
  json j;
  j["config"] = config_to_json(cfg);
  j["status"] = to_string(outcome.report.status);
  j["final_loss"] = outcome.report.final_loss;
  j["iterations"] =
      outcome.report.loss_history.empty()
          ? 0
          : outcome.report.loss_history.back().iter;
  j["restart"] = outcome.report.restart;
  if (outcome.has_rmse) {
    j["rmse_train"] = outcome.rmse_train;
    j["rmse_extrapolation"] = outcome.rmse_test;
  } else {
    j["rmse_train"] = nullptr;
    j["rmse_extrapolation"] = nullptr;
  }
  if (exp.reported_loss) j["reported_loss"] = *exp.reported_loss;
  if (exp.reported_rmse) j["reported_rmse"] = *exp.reported_rmse;
  j["timing"] = {{"train_seconds", outcome.report.wall_time}};
  if (!outcome.error.empty()) j["error"] = outcome.error;
  return j;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_artifact(path);
  out << j.dump(2) << '\n';
}

}  // namespace

TrainOutcome cmd_train(const ExperimentConfig& cfg) {
  const Experiment exp = materialize(cfg);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  const auto train_grid = linspace(cfg.train_start, cfg.train_end, cfg.n_points);
  const auto test_grid = linspace(cfg.test_start, cfg.test_end, cfg.test_points);

  TrainOutcome outcome;
  outcome.report_path = (dir / "report.json").string();

  ResidualLoss loss(make_trial(exp, cfg, nets_for(cfg, exp.system.dim, 0), train_grid),
                    exp.system);
  const InitFn reinit = [&cfg, &exp](int restart) {
    return flat_of(nets_for(cfg, exp.system.dim, restart));
  };

  try {
    outcome.report =
        run_minimizer(cfg, loss, flat_of(nets_for(cfg, exp.system.dim, 0)), reinit);
  } catch (const std::exception& ex) {
    outcome.exit_code = 2;
    outcome.error = ex.what();
    outcome.report.final_loss = std::numeric_limits<double>::quiet_NaN();
    json j = report_json(cfg, exp, outcome);
    j["status"] = "training_error";
    write_json(dir / "report.json", j);
    return outcome;
  }
  if (outcome.report.status == TrainStatus::line_search_failure) outcome.exit_code = 2;

  write_loss_history(dir / "loss_history.csv", outcome.report);

  TrialSolution fitted =
      make_trial(exp, cfg, nets_for(cfg, exp.system.dim, 0), train_grid);
  fitted.set_flat_params(outcome.report.final_p);

  DenseSolution reference;
  const DenseSolution* ref_ptr = nullptr;
  try {
    reference = rk45(exp.system, 0.0, std::max(cfg.train_end, cfg.test_end), 1e-9, 1e-9);
    ref_ptr = &reference;
    outcome.rmse_train = rmse(fitted, reference, train_grid);
    outcome.rmse_test = rmse(fitted, reference, test_grid);
    outcome.has_rmse = true;
  } catch (const std::exception& ex) {
    outcome.exit_code = 2;
    outcome.error = ex.what();
  }

  write_trajectory(dir / "trajectory.csv", fitted, ref_ptr, train_grid);
  write_trajectory(dir / "extrapolation.csv", fitted, ref_ptr, test_grid);
  write_json(dir / "report.json", report_json(cfg, exp, outcome));
  return outcome;
}

int cmd_reference(const ExperimentConfig& cfg) {
  const Experiment exp = materialize(cfg);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  std::vector<double> grid = linspace(cfg.train_start, cfg.train_end, cfg.n_points);
  const auto test_grid = linspace(cfg.test_start, cfg.test_end, cfg.test_points);
  grid.insert(grid.end(), test_grid.begin(), test_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  DenseSolution reference;
  try {
    reference = rk45(exp.system, 0.0, std::max(cfg.train_end, cfg.test_end), 1e-9, 1e-9);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "reference integration failed: %s\n", ex.what());
    return 2;
  }

  auto out = open_artifact(dir / "reference.csv");
  out << 't';
  for (int k = 1; k <= exp.system.dim; ++k) out << ",y_" << k;
  out << '\n';
  for (const double t : grid) {
    const Eigen::VectorXd y = reference.at(t);
    out << fmt17(t);
    for (int k = 0; k < exp.system.dim; ++k) out << ',' << fmt17(y(k));
    out << '\n';
  }
  return 0;
}

int cmd_compare(const ExperimentConfig& cfg, const std::vector<std::string>& methods) {
  if (methods.empty()) throw ConfigError("methods", "need at least one of bfgs, gd");

  const Experiment exp = materialize(cfg);
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  const auto train_grid = linspace(cfg.train_start, cfg.train_end, cfg.n_points);
  const InitFn reinit = [&cfg, &exp](int restart) {
    return flat_of(nets_for(cfg, exp.system.dim, restart));
  };
  const Eigen::VectorXd p0 = flat_of(nets_for(cfg, exp.system.dim, 0));

  json summary;
  summary["config"] = config_to_json(cfg);
  int code = 0;
  for (const std::string& raw : methods) {
    std::string method = raw == "gd" ? "gradient_descent" : raw;
    if (method != "bfgs" && method != "gradient_descent") {
      throw ConfigError("methods", "unknown method '" + raw + "'");
    }
    ExperimentConfig per = cfg;
    per.optimizer.method = method;

    ResidualLoss loss(make_trial(exp, cfg, nets_for(cfg, exp.system.dim, 0), train_grid),
                      exp.system);
    TrainReport report;
    try {
      report = run_minimizer(per, loss, p0, reinit);
    } catch (const std::exception& ex) {
      summary["methods"][raw] = {{"error", ex.what()}};
      code = 2;
      continue;
    }
    write_loss_history(dir / ("loss_history_" + raw + ".csv"), report);
    summary["methods"][raw] = {{"final_loss", report.final_loss},
                               {"status", to_string(report.status)},
                               {"iterations", report.loss_history.back().iter},
                               {"restart", report.restart}};
    if (report.status == TrainStatus::line_search_failure) code = 2;
  }
  write_json(dir / "compare.json", summary);
  return code;
}

int cmd_bench_all(const std::string& out_dir, std::uint64_t seed) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  json rows = json::array();
  int code = 0;
  auto csv = open_artifact(dir / "bench.csv");
  csv << "preset,paper_loss,our_loss,paper_rmse,our_rmse,extrapolation_rmse,wall_time\n";

  for (const std::string& name : builtin_names()) {
    ExperimentConfig cfg = config_from_preset(name);
    cfg.seed = seed;
    cfg.output_dir = (dir / name).string();

    json row;
    row["preset"] = name;
    csv << name << ',';

    const Experiment exp = materialize(cfg);
    if (exp.reported_loss) {
      row["paper_loss"] = *exp.reported_loss;
      csv << fmt17(*exp.reported_loss);
    } else {
      row["paper_loss"] = nullptr;
    }
    csv << ',';

    TrainOutcome outcome;
    std::string error;
    try {
      outcome = cmd_train(cfg);
      if (outcome.exit_code != 0) code = 2;
      error = outcome.error;
    } catch (const std::exception& ex) {
      code = 2;
      error = ex.what();
      outcome.exit_code = 2;
    }

    const bool trained =
        !outcome.report.loss_history.empty() && std::isfinite(outcome.report.final_loss);
    if (trained) {
      row["our_loss"] = outcome.report.final_loss;
      csv << fmt17(outcome.report.final_loss);
    } else {
      row["our_loss"] = nullptr;
    }
    csv << ',';
    if (exp.reported_rmse) {
      row["paper_rmse"] = *exp.reported_rmse;
      csv << fmt17(*exp.reported_rmse);
    } else {
      row["paper_rmse"] = nullptr;
    }
    csv << ',';
    if (outcome.has_rmse) {
      row["our_rmse"] = outcome.rmse_train;
      row["extrapolation_rmse"] = outcome.rmse_test;
      csv << fmt17(outcome.rmse_train) << ',' << fmt17(outcome.rmse_test);
    } else {
      row["our_rmse"] = nullptr;
      row["extrapolation_rmse"] = nullptr;
      csv << ',';
    }
    csv << ',' << fmt17(outcome.report.wall_time) << '\n';
    row["wall_time"] = outcome.report.wall_time;
    row["status"] = to_string(outcome.report.status);
    if (!error.empty()) row["error"] = error;
    rows.push_back(row);
  }

  write_json(dir / "bench.json", rows);
  return code;
}

}  // namespace lieode
