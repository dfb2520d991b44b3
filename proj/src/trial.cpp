#include "lieode/trial.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace lieode {
namespace {

void check_nets(const std::vector<ScalarNet>& nets, int dim) {
  if (static_cast<int>(nets.size()) != dim) {
    throw std::invalid_argument("trial solution: need one net per component");
  }
}

}  // namespace

TrialSolution::TrialSolution(const AffineField& field, const Eigen::VectorXd& y0,
                             std::vector<ScalarNet> nets, const std::vector<double>& grid)
    : base_([field, y0](double t) { return flow(field, y0, t); }),
      table_(flow_table(field, y0, grid)),
      nets_(std::move(nets)) {
  check_nets(nets_, static_cast<int>(y0.size()));
}

TrialSolution::TrialSolution(BaseFlow base, std::vector<ScalarNet> nets,
                             const std::vector<double>& grid)
    : base_(std::move(base)), nets_(std::move(nets)) {
  if (grid.empty()) throw std::invalid_argument("trial solution: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("trial solution: grid must be strictly ascending");
    }
  }
  const int n = static_cast<int>(base_(grid[0]).y.size());
  check_nets(nets_, n);
  table_.times = grid;
  table_.values.resize(static_cast<int>(grid.size()), n);
  table_.derivs.resize(static_cast<int>(grid.size()), n);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FlowResult r = base_(grid[i]);
    table_.values.row(static_cast<int>(i)) = r.y.transpose();
    table_.derivs.row(static_cast<int>(i)) = r.dy.transpose();
  }
}

TrialEval TrialSolution::eval_with_base(double t, const Eigen::VectorXd& ybar,
                                        const Eigen::VectorXd& dybar) const {
  const int n = dim();
  TrialEval out;
  out.yhat.resize(n);
  out.yhat_dt.resize(n);
  out.sens_y.resize(n);
  out.sens_dy.resize(n);
  for (int k = 0; k < n; ++k) {
    const NetEval e = eval_full(nets_[k], t);
    out.yhat(k) = ybar(k) + t * e.value;
    out.yhat_dt(k) = dybar(k) + e.value + t * e.dt;
    out.sens_y[k] = t * e.grad_p;
    out.sens_dy[k] = e.grad_p + t * e.grad_p_dt;
  }
  return out;
}

TrialEval TrialSolution::eval_at(double t) const {
  const auto& times = table_.times;
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it != times.end() && *it == t) {
    const auto i = static_cast<int>(it - times.begin());
    return eval_with_base(t, table_.values.row(i).transpose(),
                          table_.derivs.row(i).transpose());
  }
  const FlowResult r = base_(t);
  return eval_with_base(t, r.y, r.dy);
}

TrialEval TrialSolution::eval_index(std::size_t i) const {
  return eval_with_base(table_.times[i], table_.values.row(static_cast<int>(i)).transpose(),
                        table_.derivs.row(static_cast<int>(i)).transpose());
}

std::vector<TrialEval> TrialSolution::eval_grid() const {
  std::vector<TrialEval> out;
  out.reserve(table_.times.size());
  for (std::size_t i = 0; i < table_.times.size(); ++i) out.push_back(eval_index(i));
  return out;
}

int TrialSolution::flat_param_count() const {
  int total = 0;
  for (const auto& net : nets_) total += net.param_count();
  return total;
}

Eigen::VectorXd TrialSolution::flat_params() const {
  Eigen::VectorXd p(flat_param_count());
  int offset = 0;
  for (const auto& net : nets_) {
    p.segment(offset, net.param_count()) = net.flatten();
    offset += net.param_count();
  }
  return p;
}

void TrialSolution::set_flat_params(const Eigen::VectorXd& p) {
  if (p.size() != flat_param_count()) {
    throw std::invalid_argument("set_flat_params: wrong parameter vector length");
  }
  int offset = 0;
  for (auto& net : nets_) {
    net = ScalarNet::unflatten(net.width(),
                               Eigen::VectorXd(p.segment(offset, net.param_count())));
    offset += net.param_count();
  }
}

}  // namespace lieode
