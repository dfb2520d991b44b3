#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "lieode/integrate.hpp"
#include "lieode/system.hpp"
#include "lieode/trial.hpp"

namespace lieode {

// Loss callable for the optimizers: returns L(p) and fills grad.
using LossFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LossState {
  Eigen::VectorXd p;
  double L = 0.0;
  Eigen::VectorXd g;
  Eigen::VectorXd per_component;  // L_k, summing to L
};

// Number of worker threads for per-point loss evaluation: the LIEODE_THREADS
// environment variable when set, otherwise the OpenMP default (1 if built
// without OpenMP).
int default_threads();

// Mean squared ODE residual over the training grid:
//   L(p) = (1/n_pts) sum_i sum_k (yhat_dt_k(t_i) - f_k(t_i, yhat(t_i)))^2
// with the analytic gradient assembled from trial sensitivities and the
// system jacobian.  Per-point work runs on `threads` threads; per-point
// results land in indexed slots and are reduced in grid order, so any thread
// count produces bit-identical sums.
class ResidualLoss {
 public:
  ResidualLoss(TrialSolution trial, OdeSystem system, int threads = -1);

  // Optimizer interface: loss value, gradient into `grad`.
  double operator()(const Eigen::VectorXd& p, Eigen::VectorXd& grad);

  // Full state including per-component contributions.
  LossState eval(const Eigen::VectorXd& p);

  int param_count() const { return trial_.flat_param_count(); }
  const TrialSolution& trial() const { return trial_; }
  int threads() const { return threads_; }

 private:
  void point_contribution(std::size_t i);

  TrialSolution trial_;
  OdeSystem system_;
  int threads_;
  // per-point slots, reduced in index order after the parallel fill
  std::vector<double> point_loss_;
  Eigen::MatrixXd point_comp_;  // n_pts x n, squared residual per component
  Eigen::MatrixXd point_grad_;  // n_pts x d
  std::vector<std::exception_ptr> point_error_;
};

struct OptimizerConfig {
  int max_iters = 1000;
  double grad_tol = 1e-8;   // on the max-norm of the gradient
  double loss_tol = 1e-10;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int restarts = 1;
  std::string method = "bfgs";  // "bfgs" or "gradient_descent"
};

enum class TrainStatus { converged_grad, converged_loss, max_iters, line_search_failure };
const char* to_string(TrainStatus status);

struct HistoryRow {
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;  // max-norm
};

struct TrainReport {
  std::vector<HistoryRow> loss_history;
  Eigen::VectorXd final_p;
  double final_loss = 0.0;
  double rmse = 0.0;  // filled by the pipeline once a reference exists
  TrainStatus status = TrainStatus::max_iters;
  double wall_time = 0.0;  // seconds
  int restart = 0;         // which seeded start produced this report
};

// Fresh start point for restart r >= 1 (restart 0 uses p0 as given).
using InitFn = std::function<Eigen::VectorXd(int restart)>;

// Dense inverse-Hessian BFGS with a strong-Wolfe line search.  When
// cfg.restarts > 1 and `reinit` is provided, each restart descends from
// reinit(r) and the lowest final loss wins.
TrainReport bfgs_minimize(const LossFn& f, const Eigen::VectorXd& p0,
                          const OptimizerConfig& cfg, const InitFn& reinit = {});

// Gradient descent with Armijo backtracking from a unit step; same stopping
// rules and report shape as bfgs_minimize.
TrainReport gd_minimize(const LossFn& f, const Eigen::VectorXd& p0,
                        const OptimizerConfig& cfg, const InitFn& reinit = {});

// Average over components of the per-component root-mean-square deviation
// between the trial solution and a reference trajectory at eval_times.
double rmse(const TrialSolution& trial, const DenseSolution& reference,
            const std::vector<double>& eval_times);

}  // namespace lieode
