// Acceptance gate: six criteria, one PASS/FAIL line each, exit = #failures.
// All tolerances are pinned here, next to the check that uses them.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lieode/config.hpp"
#include "lieode/integrate.hpp"
#include "lieode/net.hpp"
#include "lieode/rng.hpp"
#include "lieode/run.hpp"
#include "lieode/system.hpp"
#include "lieode/training.hpp"
#include "lieode/trial.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace lieode;

namespace {

struct Criterion {
  bool pass = true;
  std::ostringstream detail;
};

void clause(Criterion& c, bool ok, const std::string& what) {
  if (!c.detail.str().empty()) c.detail << "; ";
  c.detail << what << (ok ? " ok" : " FAILED");
  if (!ok) c.pass = false;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path out_dir(const std::string& stem) {
  const fs::path dir = fs::temp_directory_path() / "lieode_acceptance" / stem;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainOutcome run_preset(const std::string& name, Criterion& c, double budget_s) {
  ExperimentConfig cfg = config_from_preset(name);
  cfg.output_dir = out_dir(name).string();
  const auto t0 = std::chrono::steady_clock::now();
  const TrainOutcome outcome = cmd_train(cfg);
  const double elapsed = seconds_since(t0);
  clause(c, elapsed <= budget_s, "time " + num(elapsed) + "s <= " + num(budget_s) + "s");
  clause(c, outcome.exit_code == 0 && outcome.has_rmse, "pipeline clean");
  return outcome;
}

std::vector<ScalarNet> fresh_nets(int dim, int m, std::uint64_t base_seed) {
  std::vector<ScalarNet> nets;
  for (int k = 0; k < dim; ++k) {
    nets.push_back(init_net(m, base_seed + static_cast<std::uint64_t>(k)));
  }
  return nets;
}

VectorXd flat_of(const std::vector<ScalarNet>& nets) {
  int total = 0;
  for (const auto& net : nets) total += net.param_count();
  VectorXd p(total);
  int off = 0;
  for (const auto& net : nets) {
    p.segment(off, net.param_count()) = net.flatten();
    off += net.param_count();
  }
  return p;
}

VectorXd comp_rms(const TrialSolution& trial, const DenseSolution& ref,
                  const std::vector<double>& times) {
  VectorXd sq = VectorXd::Zero(trial.dim());
  for (const double t : times) {
    sq += (trial.eval_at(t).yhat - ref.at(t)).cwiseAbs2();
  }
  return (sq / static_cast<double>(times.size())).cwiseSqrt();
}

// 1. food chain: preset settings, best of 5 starts, loss and train-RMSE bands
Criterion criterion1() {
  Criterion c;
  const TrainOutcome o = run_preset("food_chain", c, 600.0);
  clause(c, o.report.final_loss <= 1e-3, "loss " + num(o.report.final_loss) + " <= 1e-3");
  clause(c, o.rmse_train <= 0.05, "rmse " + num(o.rmse_train) + " <= 0.05");
  return c;
}

// 2. Rossler: loss/RMSE bands plus extrapolation within 5x of train RMSE
Criterion criterion2() {
  Criterion c;
  const TrainOutcome o = run_preset("rossler", c, 300.0);
  clause(c, o.report.final_loss <= 1e-4, "loss " + num(o.report.final_loss) + " <= 1e-4");
  clause(c, o.rmse_train <= 1e-2, "rmse " + num(o.rmse_train) + " <= 1e-2");
  clause(c, o.rmse_test <= 5.0 * o.rmse_train,
         "extrap " + num(o.rmse_test) + " <= 5x train (" + num(5.0 * o.rmse_train) + ")");
  return c;
}

// 3. van der Pol: best of 10 starts, wide RMSE band over the long interval
Criterion criterion3() {
  Criterion c;
  const TrainOutcome o = run_preset("van_der_pol", c, 600.0);
  clause(c, o.rmse_train <= 0.25, "rmse " + num(o.rmse_train) + " <= 0.25");
  return c;
}

// 4. Lorenz: train-RMSE band, finite extrapolation, per-component 5x bound
Criterion criterion4() {
  Criterion c;
  ExperimentConfig cfg = config_from_preset("lorenz");
  cfg.output_dir = out_dir("lorenz").string();
  const TrainOutcome o = cmd_train(cfg);
  clause(c, o.exit_code == 0 && o.has_rmse, "pipeline clean");
  clause(c, o.rmse_train <= 0.1, "rmse " + num(o.rmse_train) + " <= 0.1");

  const SystemPreset preset = builtin("lorenz");
  TrialSolution fitted(preset.linear_part, preset.system.y0,
                       fresh_nets(3, cfg.hidden_units, 1),
                       linspace(cfg.train_start, cfg.train_end, cfg.n_points));
  fitted.set_flat_params(o.report.final_p);
  const DenseSolution ref = rk45(preset.system, 0.0, cfg.test_end, 1e-9, 1e-9);
  const auto test_grid = linspace(cfg.test_start, cfg.test_end, cfg.test_points);

  bool finite = true;
  for (const double t : test_grid) {
    finite = finite && fitted.eval_at(t).yhat.allFinite();
  }
  clause(c, finite, "extrapolation finite");

  const VectorXd train_rms =
      comp_rms(fitted, ref, linspace(cfg.train_start, cfg.train_end, cfg.n_points));
  const VectorXd test_rms = comp_rms(fitted, ref, test_grid);
  for (int k = 0; k < 3; ++k) {
    clause(c, test_rms(k) <= 5.0 * train_rms(k),
           "comp " + std::to_string(k + 1) + " extrap " + num(test_rms(k)) + " <= 5x train (" +
               num(5.0 * train_rms(k)) + ")");
  }
  return c;
}

// 5. BFGS final loss strictly below gradient descent on >= 4 of 5 seeds
Criterion criterion5() {
  Criterion c;
  for (const char* name : {"food_chain", "rossler"}) {
    const SystemPreset preset = builtin(name);
    const auto grid = linspace(preset.train_start, preset.train_end, preset.n_points);
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      ResidualLoss loss(TrialSolution(preset.linear_part, preset.system.y0,
                                      fresh_nets(preset.system.dim, preset.hidden_units, seed),
                                      grid),
                        preset.system);
      const LossFn f = [&loss](const VectorXd& p, VectorXd& g) { return loss(p, g); };
      const VectorXd p0 = flat_of(fresh_nets(preset.system.dim, preset.hidden_units, seed));
      OptimizerConfig opt;
      opt.max_iters = 1000;
      const double bfgs_loss = bfgs_minimize(f, p0, opt).final_loss;
      const double gd_loss = gd_minimize(f, p0, opt).final_loss;
      if (bfgs_loss < gd_loss) ++wins;
    }
    clause(c, wins >= 4, std::string(name) + " bfgs wins " + std::to_string(wins) + "/5 >= 4");
  }
  return c;
}

bool gradient_oracle() {
  struct Probe {
    const char* preset;
    int m;
    int n_pts;
    std::uint64_t seed;
  };
  const Probe probes[] = {{"food_chain", 4, 12, 3},
                          {"van_der_pol", 5, 15, 11},
                          {"lorenz", 4, 10, 21},
                          {"rossler", 6, 14, 5},
                          {"food_chain", 3, 8, 99}};
  oracles::Rng pick(7);
  for (const auto& probe : probes) {
    const SystemPreset preset = builtin(probe.preset);
    ResidualLoss loss(TrialSolution(preset.linear_part, preset.system.y0,
                                    fresh_nets(preset.system.dim, probe.m, probe.seed),
                                    linspace(preset.train_start, preset.train_end, probe.n_pts)),
                      preset.system);
    VectorXd p(loss.param_count());
    lieode::Rng init(probe.seed * 131 + 17);
    for (int i = 0; i < p.size(); ++i) p(i) = init.uniform(-0.5, 0.5);
    VectorXd grad;
    loss(p, grad);
    for (int probe_i = 0; probe_i < 20; ++probe_i) {
      const int i = static_cast<int>(pick.integer(0, loss.param_count() - 1));
      const double h = 1e-6 * std::max(1.0, std::abs(p(i)));
      VectorXd scratch, pp = p, pm = p;
      pp(i) += h;
      pm(i) -= h;
      const double fd = (loss(pp, scratch) - loss(pm, scratch)) / (2.0 * h);
      if (oracles::rel_err(grad(i), fd) > 1e-5) return false;
    }
  }
  return true;
}

bool ic_exactness() {
  for (const std::string& name : builtin_names()) {
    const SystemPreset preset = builtin(name);
    for (const std::uint64_t seed : {1ull, 77ull, 901ull}) {
      TrialSolution trial(preset.linear_part, preset.system.y0,
                          fresh_nets(preset.system.dim, 7, seed),
                          linspace(0.0, preset.train_end, 9));
      const VectorXd y = trial.eval_at(0.0).yhat;
      for (int k = 0; k < preset.system.dim; ++k) {
        if (y(k) != preset.system.y0(k)) return false;
      }
    }
  }
  return true;
}

bool zero_remainder() {
  oracles::Rng rng(42);
  for (int trial_no = 0; trial_no < 5; ++trial_no) {
    const int dim = 2 + trial_no % 3;
    MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    VectorXd cv(dim);
    for (int i = 0; i < dim; ++i) cv(i) = rng.uniform(-1.0, 1.0);

    OdeSystem sys;
    sys.name = "affine";
    sys.dim = dim;
    sys.rhs = [a, cv](double, const VectorXd& y) -> VectorXd { return a * y + cv; };
    sys.jacobian = [a](double, const VectorXd&) -> MatrixXd { return a; };
    sys.y0 = VectorXd::Ones(dim);
    sys.time_horizon = 1.0;

    std::vector<ScalarNet> nets(dim);
    for (auto& net : nets) {
      net.w1 = VectorXd::Zero(5);
      net.b1 = VectorXd::Zero(5);
      net.w2 = VectorXd::Zero(5);
      net.b2 = 0.0;
    }
    ResidualLoss loss(TrialSolution(AffineField(a, cv), sys.y0, nets, linspace(0.0, 1.0, 20)),
                      sys, 1);
    VectorXd grad;
    if (loss(VectorXd::Zero(loss.param_count()), grad) > 1e-20) return false;
  }
  return true;
}

bool expm_oracle() {
  oracles::Rng rng(11);
  for (int trial_no = 0; trial_no < 25; ++trial_no) {
    MatrixXd m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-0.25, 0.25);
    const MatrixXd got = expm(m);
    const MatrixXd want = oracles::expm_taylor30(m);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (oracles::rel_err(got(i, j), want(i, j)) > 1e-12) return false;
  }
  // flow semigroup: advancing by s then t equals advancing by s+t
  for (int trial_no = 0; trial_no < 10; ++trial_no) {
    MatrixXd a(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = rng.uniform(-0.6, 0.6);
    VectorXd cv(3), y0(3);
    for (int i = 0; i < 3; ++i) {
      cv(i) = rng.uniform(-1.0, 1.0);
      y0(i) = rng.uniform(-2.0, 2.0);
    }
    const AffineField field(a, cv);
    const double s = rng.uniform(0.0, 1.0), t = rng.uniform(0.0, 1.0);
    const VectorXd two_step = flow(field, flow(field, y0, s).y, t).y;
    const VectorXd one_step = flow(field, y0, s + t).y;
    for (int i = 0; i < 3; ++i) {
      if (oracles::rel_err(two_step(i), one_step(i)) > 1e-10) return false;
    }
  }
  return true;
}

bool integrator_checks() {
  // empirical RK4 order on y' = -y
  OdeSystem decay;
  decay.name = "decay";
  decay.dim = 1;
  decay.rhs = [](double, const VectorXd& y) -> VectorXd { return -y; };
  decay.jacobian = [](double, const VectorXd&) -> MatrixXd {
    return MatrixXd::Constant(1, 1, -1.0);
  };
  decay.y0 = VectorXd::Ones(1);
  decay.time_horizon = 1.0;

  const double exact = std::exp(-1.0);
  const double e1 = std::abs(rk4(decay, 0.0, 1.0, 20).states.back()(0) - exact);
  const double e2 = std::abs(rk4(decay, 0.0, 1.0, 40).states.back()(0) - exact);
  const double order = std::log2(e1 / e2);
  if (order < 3.8 || order > 4.2) return false;

  // rk45 agrees with itself across tolerance decades on every preset
  for (const std::string& name : builtin_names()) {
    const SystemPreset preset = builtin(name);
    const double t1 = preset.test_end;
    const DenseSolution loose = rk45(preset.system, 0.0, t1, 1e-6, 1e-6);
    const DenseSolution tight = rk45(preset.system, 0.0, t1, 1e-9, 1e-9);
    for (const double t : linspace(0.0, t1, 23)) {
      const VectorXd a = loose.at(t), b = tight.at(t);
      for (int k = 0; k < preset.system.dim; ++k) {
        if (oracles::rel_err(a(k), b(k)) > 1e-5) return false;
      }
    }
  }
  return true;
}

bool deterministic_history() {
  auto run_once = [] {
    const SystemPreset preset = builtin("rossler");
    ResidualLoss loss(TrialSolution(preset.linear_part, preset.system.y0, fresh_nets(3, 8, 7),
                                    linspace(0.0, 1.0, 20)),
                      preset.system, 1);
    const LossFn f = [&loss](const VectorXd& p, VectorXd& g) { return loss(p, g); };
    OptimizerConfig opt;
    opt.max_iters = 40;
    return bfgs_minimize(f, flat_of(fresh_nets(3, 8, 7)), opt);
  };
  const TrainReport r1 = run_once();
  const TrainReport r2 = run_once();
  if (r1.loss_history.size() != r2.loss_history.size()) return false;
  for (std::size_t i = 0; i < r1.loss_history.size(); ++i) {
    if (r1.loss_history[i].loss != r2.loss_history[i].loss) return false;
    if (r1.loss_history[i].grad_norm != r2.loss_history[i].grad_norm) return false;
  }
  return true;
}

// 6. property suites: gradient oracle, IC exactness, zero remainder,
//    expm oracle + semigroup, integrator orders, deterministic history
Criterion criterion6() {
  Criterion c;
  clause(c, gradient_oracle(), "gradient vs FD <= 1e-5");
  clause(c, ic_exactness(), "IC bit-exact");
  clause(c, zero_remainder(), "zero remainder L <= 1e-20");
  clause(c, expm_oracle(), "expm oracle + semigroup");
  clause(c, integrator_checks(), "rk4 order + rk45 cross-tol");
  clause(c, deterministic_history(), "bit-identical history");
  return c;
}

}  // namespace

int main() {
  int failures = 0;
  Criterion (*criteria[])() = {criterion1, criterion2, criterion3,
                               criterion4, criterion5, criterion6};
  for (int i = 0; i < 6; ++i) {
    const Criterion c = criteria[i]();
    std::printf("criterion %d: %s  (%s)\n", i + 1, c.pass ? "PASS" : "FAIL",
                c.detail.str().c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  return failures;
}
