#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace lieode {

// e^M via scaling-and-squaring with a truncated Taylor core.
// Throws std::invalid_argument for non-square or non-finite input and
// std::overflow_error when entries of the result leave the floating range.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

// Affine vector field  y' = A y + c.
struct AffineField {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;

  AffineField() = default;  // empty field, to be assigned before use
  AffineField(Eigen::MatrixXd a, Eigen::VectorXd c_in);
  // Linear field (c = 0).
  static AffineField linear(Eigen::MatrixXd a);

  int dim() const { return static_cast<int>(A.rows()); }
};

struct FlowResult {
  Eigen::VectorXd y;
  Eigen::VectorXd dy;  // A y + c
};

// Any closed-form base trajectory: t -> (value, time derivative).
using BaseFlow = std::function<FlowResult(double)>;

// Exact solution of y' = Ay + c, y(0) = y0, evaluated at time t as the top
// block of expm(t * [[A, c], [0, 0]]) applied to (y0, 1).  The augmented
// matrix handles singular A (constant and secular terms) with no special
// casing.  flow(field, y0, 0) returns (y0, A y0 + c) exactly.
FlowResult flow(const AffineField& field, const Eigen::VectorXd& y0, double t);

struct FlowTable {
  std::vector<double> times;   // sorted ascending
  Eigen::MatrixXd values;      // len(times) x n, row i = y(times[i])
  Eigen::MatrixXd derivs;      // row i = A * values.row(i) + c
};

// Tabulates flow() on a time grid.  A uniform grid costs one expm: the step
// propagator is reused by repeated multiplication.
FlowTable flow_table(const AffineField& field, const Eigen::VectorXd& y0,
                     const std::vector<double>& times);

}  // namespace lieode
