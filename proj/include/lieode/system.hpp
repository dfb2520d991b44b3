#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lieode/linflow.hpp"

namespace lieode {

// First-order IVP  y' = f(t, y), y(0) = y0  on [0, time_horizon].
struct OdeSystem {
  std::string name;
  int dim = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
  std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> jacobian;
  std::map<std::string, double> params;
  Eigen::VectorXd y0;
  double time_horizon = 0.0;
};

// A benchmark system bundled with its affine part, grid and network sizes,
// and previously reported metrics (when available) for comparison tables.
struct SystemPreset {
  OdeSystem system;
  AffineField linear_part;
  double train_start = 0.0;
  double train_end = 0.0;
  int n_points = 0;
  int hidden_units = 0;
  double test_start = 0.0;
  double test_end = 0.0;
  int test_points = 0;
  std::optional<double> reported_loss;
  std::optional<double> reported_rmse;
};

// One of: food_chain, van_der_pol, lorenz, rossler.
SystemPreset builtin(const std::string& name);
std::vector<std::string> builtin_names();

// The closed-form base trajectory as originally published for each preset.
// For food_chain and van_der_pol it coincides with the exact affine flow; for
// lorenz and rossler it differs (different decay rate on the third component,
// and a dropped secular term, respectively).  Used for A/B comparison against
// the exact flow, selected by the `paper_literal_base` config switch.
BaseFlow reported_base(const std::string& name);

// System whose right-hand side is given as expression strings over
// t, y1..y_dim and named parameters; the jacobian comes from dual-number
// evaluation column by column.
OdeSystem from_expressions(int dim, const std::vector<std::string>& rhs_sources,
                           const std::map<std::string, double>& params,
                           const Eigen::VectorXd& y0, double horizon);

struct JacobianReport {
  bool pass = false;
  double max_rel_err = 0.0;
  int trials = 0;
  double tol = 0.0;
};

// Compares the analytic jacobian to central finite differences at random
// states in a unit box around y0 and random times in [0, horizon].
JacobianReport jacobian_check(const OdeSystem& system, int trials, double tol,
                              std::uint64_t seed = 0);

}  // namespace lieode
