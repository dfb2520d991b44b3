#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lieode/system.hpp"

namespace lieode {

// Trajectory with cubic Hermite dense output between accepted knots (uses the
// stored state and derivative at both ends of each interval, 4th order).
struct DenseSolution {
  std::vector<double> times;            // knots, strictly increasing
  std::vector<Eigen::VectorXd> states;  // y at knots
  std::vector<Eigen::VectorXd> derivs;  // f(t, y) at knots
  int accepted = 0;
  int rejected = 0;
  double rtol = 0.0;
  double atol = 0.0;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  // Interpolated state; knot times return the stored state exactly.
  // Queries outside [t_begin, t_end] throw std::out_of_range.
  Eigen::VectorXd at(double t) const;

  // Rows are at(times[i]).
  Eigen::MatrixXd sample(const std::vector<double>& query_times) const;
};

// Classic fixed-step 4-stage Runge-Kutta on a uniform grid.
DenseSolution rk4(const OdeSystem& system, double t0, double t1, int steps);

// Dormand-Prince 5(4) embedded pair with a PI step-size controller and
// automatic initial step.  Throws std::runtime_error on step-size underflow,
// naming the time of failure.
DenseSolution rk45(const OdeSystem& system, double t0, double t1,
                   double rtol = 1e-9, double atol = 1e-9);

}  // namespace lieode
