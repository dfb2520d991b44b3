#pragma once

#include <Eigen/Dense>
#include <vector>

#include "lieode/linflow.hpp"
#include "lieode/net.hpp"

namespace lieode {

// Everything the residual loss needs at one time point.  sens_y[k] and
// sens_dy[k] hold d(yhat_k)/dp_k and d(yhat_dt_k)/dp_k over net k's own
// parameters; component k never depends on another net's parameters.
struct TrialEval {
  Eigen::VectorXd yhat;
  Eigen::VectorXd yhat_dt;
  std::vector<Eigen::VectorXd> sens_y;
  std::vector<Eigen::VectorXd> sens_dy;
};

// Candidate solution  yhat_k(t) = ybar_k(t) + t * N_k(t):  a closed-form base
// trajectory plus a t-gated network correction per component.  The t factor
// zeroes the correction at t=0, so the initial condition holds bit-exactly
// for any parameter values.
class TrialSolution {
 public:
  // Base is the exact affine flow; its values on the grid come from one
  // precomputed flow table.
  TrialSolution(const AffineField& field, const Eigen::VectorXd& y0,
                std::vector<ScalarNet> nets, const std::vector<double>& grid);

  // Base supplied as an arbitrary closed form (tabulated pointwise).
  TrialSolution(BaseFlow base, std::vector<ScalarNet> nets,
                const std::vector<double>& grid);

  // Grid times reuse the tabulated base values; other times evaluate the
  // base on demand.
  TrialEval eval_at(double t) const;
  std::vector<TrialEval> eval_grid() const;

  // Same as eval_at(grid()[i]) but indexed; safe to call concurrently.
  TrialEval eval_index(std::size_t i) const;

  int dim() const { return static_cast<int>(nets_.size()); }
  const std::vector<double>& grid() const { return table_.times; }
  const std::vector<ScalarNet>& nets() const { return nets_; }

  // Concatenation of all per-net parameter vectors, in component order.
  int flat_param_count() const;
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& p);

 private:
  TrialEval eval_with_base(double t, const Eigen::VectorXd& ybar,
                           const Eigen::VectorXd& dybar) const;

  BaseFlow base_;
  FlowTable table_;
  std::vector<ScalarNet> nets_;
};

}  // namespace lieode
