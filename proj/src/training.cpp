#include "lieode/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lieode {

int default_threads() {
  if (const char* env = std::getenv("LIEODE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ResidualLoss::ResidualLoss(TrialSolution trial, OdeSystem system, int threads)
    : trial_(std::move(trial)),
      system_(std::move(system)),
      threads_(threads > 0 ? threads : default_threads()) {
  if (system_.dim != trial_.dim()) {
    throw std::invalid_argument("ResidualLoss: system and trial dimensions differ");
  }
}

void ResidualLoss::point_contribution(std::size_t i) {
  try {
    const double t = trial_.grid()[i];
    const TrialEval e = trial_.eval_index(i);
    const Eigen::VectorXd fv = system_.rhs(t, e.yhat);
    const Eigen::MatrixXd jac = system_.jacobian(t, e.yhat);
    const Eigen::VectorXd r = e.yhat_dt - fv;
    const Eigen::VectorXd jtr = jac.transpose() * r;

    const auto row = static_cast<Eigen::Index>(i);
    point_loss_[i] = r.squaredNorm();
    point_comp_.row(row) = r.cwiseAbs2().transpose();
    int off = 0;
    for (int k = 0; k < trial_.dim(); ++k) {
      const int len = trial_.nets()[k].param_count();
      point_grad_.row(row).segment(off, len) =
          (r(k) * e.sens_dy[k] - jtr(k) * e.sens_y[k]).transpose();
      off += len;
    }
  } catch (...) {
    point_error_[i] = std::current_exception();
  }
}

double ResidualLoss::operator()(const Eigen::VectorXd& p, Eigen::VectorXd& grad) {
  trial_.set_flat_params(p);
  const auto n_pts = static_cast<std::ptrdiff_t>(trial_.grid().size());
  const int d = param_count();
  const int n = trial_.dim();

  point_loss_.assign(n_pts, 0.0);
  point_comp_.resize(n_pts, n);
  point_grad_.resize(n_pts, d);
  point_error_.assign(n_pts, nullptr);

#pragma omp parallel for schedule(static) num_threads(threads_) if (threads_ > 1)
  for (std::ptrdiff_t i = 0; i < n_pts; ++i) point_contribution(static_cast<std::size_t>(i));

  for (std::ptrdiff_t i = 0; i < n_pts; ++i) {
    if (!point_error_[i]) continue;
    try {
      std::rethrow_exception(point_error_[i]);
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "residual loss at t=" << trial_.grid()[i] << ": " << ex.what();
      throw std::runtime_error(msg.str());
    }
  }

  // reduce the per-point slots in grid order: the sum carries the same
  // rounding for every thread count
  grad = Eigen::VectorXd::Zero(d);
  double loss = 0.0;
  for (std::ptrdiff_t i = 0; i < n_pts; ++i) {
    loss += point_loss_[i];
    grad += point_grad_.row(i).transpose();
  }
  loss /= static_cast<double>(n_pts);
  grad *= 2.0 / static_cast<double>(n_pts);
  return loss;
}

LossState ResidualLoss::eval(const Eigen::VectorXd& p) {
  LossState state;
  state.p = p;
  state.L = (*this)(p, state.g);
  const auto n_pts = static_cast<std::ptrdiff_t>(trial_.grid().size());
  state.per_component = Eigen::VectorXd::Zero(trial_.dim());
  for (std::ptrdiff_t i = 0; i < n_pts; ++i) {
    state.per_component += point_comp_.row(i).transpose();
  }
  state.per_component /= static_cast<double>(n_pts);
  return state;
}

const char* to_string(TrainStatus status) {
  switch (status) {
    case TrainStatus::converged_grad: return "converged_grad";
    case TrainStatus::converged_loss: return "converged_loss";
    case TrainStatus::max_iters: return "max_iters";
    case TrainStatus::line_search_failure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

struct Probe {
  double a = 0.0;
  double L = 0.0;
  double dphi = 0.0;
  Eigen::VectorXd g;
};

// Strong-Wolfe line search: bracket then zoom, budgeted function evaluations.
// On budget exhaustion, the best point satisfying sufficient decrease is
// accepted (keeps iterates monotone); with no such point the search fails.
bool wolfe_line_search(const LossFn& f, const Eigen::VectorXd& p, const Eigen::VectorXd& d,
                       double L0, double dphi0, double c1, double c2, int max_evals,
                       Probe& out) {
  int evals = 0;
  Probe best;
  bool have_best = false;

  auto armijo = [&](const Probe& x) {
    return std::isfinite(x.L) && x.L <= L0 + c1 * x.a * dphi0;
  };
  auto probe = [&](double a) {
    Probe x;
    x.a = a;
    x.g.resize(p.size());
    x.L = f(p + a * d, x.g);
    x.dphi = x.g.dot(d);
    ++evals;
    if (armijo(x) && (!have_best || x.L < best.L)) {
      best = x;
      have_best = true;
    }
    return x;
  };

  auto zoom = [&](Probe lo, Probe hi) -> bool {
    while (evals < max_evals) {
      const double h = hi.a - lo.a;
      double aj = lo.a + 0.5 * h;  // bisection fallback
      const double denom = hi.L - lo.L - lo.dphi * h;
      if (std::isfinite(denom) && denom != 0.0) {
        const double cand = lo.a - 0.5 * lo.dphi * h * h / denom;
        const double margin = 0.1 * std::abs(h);
        const double lo_edge = std::min(lo.a, hi.a) + margin;
        const double hi_edge = std::max(lo.a, hi.a) - margin;
        if (std::isfinite(cand) && cand >= lo_edge && cand <= hi_edge) aj = cand;
      }
      const Probe x = probe(aj);
      if (!armijo(x) || x.L >= lo.L) {
        hi = x;
      } else {
        if (std::abs(x.dphi) <= -c2 * dphi0) {
          out = x;
          return true;
        }
        if (x.dphi * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = x;
      }
      if (std::abs(hi.a - lo.a) <= 1e-14 * std::max(1.0, std::abs(lo.a))) break;
    }
    if (have_best) {
      out = best;
      return true;
    }
    return false;
  };

  Probe prev;
  prev.L = L0;
  prev.dphi = dphi0;
  double a = 1.0;
  bool first = true;
  while (evals < max_evals) {
    const Probe x = probe(a);
    if (!armijo(x) || (!first && x.L >= prev.L)) return zoom(prev, x);
    if (std::abs(x.dphi) <= -c2 * dphi0) {
      out = x;
      return true;
    }
    if (x.dphi >= 0.0) return zoom(x, prev);
    prev = x;
    a = std::min(2.0 * a, 1e6);
    first = false;
  }
  if (have_best) {
    out = best;
    return true;
  }
  return false;
}

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.wolfe_c1 > 0.0 && cfg.wolfe_c1 < cfg.wolfe_c2 && cfg.wolfe_c2 < 1.0)) {
    throw std::invalid_argument("optimizer: need 0 < c1 < c2 < 1");
  }
  if (cfg.max_iters < 0) throw std::invalid_argument("optimizer: max_iters must be >= 0");
  if (cfg.restarts < 1) throw std::invalid_argument("optimizer: restarts must be >= 1");
}

TrainReport bfgs_single(const LossFn& f, Eigen::VectorXd p, const OptimizerConfig& cfg) {
  const auto dim = p.size();
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(dim, dim);
  Eigen::VectorXd g(dim);
  double loss = f(p, g);

  TrainReport rep;
  rep.status = TrainStatus::max_iters;
  rep.loss_history.push_back({0, loss, g.cwiseAbs().maxCoeff()});

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (g.cwiseAbs().maxCoeff() <= cfg.grad_tol) {
      rep.status = TrainStatus::converged_grad;
      break;
    }
    if (loss <= cfg.loss_tol) {
      rep.status = TrainStatus::converged_loss;
      break;
    }

    Eigen::VectorXd dir = -(inv_h * g);
    double dphi0 = dir.dot(g);
    if (!(dphi0 < 0.0)) {  // curvature got corrupted; fall back to steepest descent
      inv_h.setIdentity();
      dir = -g;
      dphi0 = -g.squaredNorm();
    }

    Probe step;
    if (!wolfe_line_search(f, p, dir, loss, dphi0, cfg.wolfe_c1, cfg.wolfe_c2, 40, step)) {
      rep.status = TrainStatus::line_search_failure;
      break;
    }

    const Eigen::VectorXd s = step.a * dir;
    const Eigen::VectorXd y = step.g - g;
    p += s;

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_h * y;
      inv_h.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      inv_h.noalias() += (rho * rho * y.dot(hy) + rho) * (s * s.transpose());
    }  // else: skip the update, direction stays safely descent

    loss = step.L;
    g = std::move(step.g);
    rep.loss_history.push_back({iter, loss, g.cwiseAbs().maxCoeff()});
  }

  rep.final_p = std::move(p);
  rep.final_loss = loss;
  return rep;
}

TrainReport gd_single(const LossFn& f, Eigen::VectorXd p, const OptimizerConfig& cfg) {
  Eigen::VectorXd g(p.size());
  double loss = f(p, g);

  TrainReport rep;
  rep.status = TrainStatus::max_iters;
  rep.loss_history.push_back({0, loss, g.cwiseAbs().maxCoeff()});

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    if (g.cwiseAbs().maxCoeff() <= cfg.grad_tol) {
      rep.status = TrainStatus::converged_grad;
      break;
    }
    if (loss <= cfg.loss_tol) {
      rep.status = TrainStatus::converged_loss;
      break;
    }

    const double gg = g.squaredNorm();
    double a = 1.0;
    bool accepted = false;
    Eigen::VectorXd g_new(p.size());
    for (int bt = 0; bt < 40; ++bt) {
      const double trial_loss = f(p - a * g, g_new);
      if (std::isfinite(trial_loss) && trial_loss <= loss - cfg.wolfe_c1 * a * gg) {
        p -= a * g;
        loss = trial_loss;
        g = g_new;
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) {
      rep.status = TrainStatus::line_search_failure;
      break;
    }
    rep.loss_history.push_back({iter, loss, g.cwiseAbs().maxCoeff()});
  }

  rep.final_p = std::move(p);
  rep.final_loss = loss;
  return rep;
}

template <class Single>
TrainReport best_of_restarts(const LossFn& f, const Eigen::VectorXd& p0,
                             const OptimizerConfig& cfg, const InitFn& reinit,
                             Single single) {
  validate(cfg);
  const auto t_start = std::chrono::steady_clock::now();
  const int runs = (reinit && cfg.restarts > 1) ? cfg.restarts : 1;

  TrainReport best;
  for (int r = 0; r < runs; ++r) {
    TrainReport rep = single(f, r == 0 ? p0 : reinit(r), cfg);
    rep.restart = r;
    if (r == 0 || rep.final_loss < best.final_loss) best = std::move(rep);
  }
  best.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return best;
}

}  // namespace

TrainReport bfgs_minimize(const LossFn& f, const Eigen::VectorXd& p0,
                          const OptimizerConfig& cfg, const InitFn& reinit) {
  return best_of_restarts(f, p0, cfg, reinit, bfgs_single);
}

TrainReport gd_minimize(const LossFn& f, const Eigen::VectorXd& p0,
                        const OptimizerConfig& cfg, const InitFn& reinit) {
  return best_of_restarts(f, p0, cfg, reinit, gd_single);
}

double rmse(const TrialSolution& trial, const DenseSolution& reference,
            const std::vector<double>& eval_times) {
  if (eval_times.empty()) throw std::invalid_argument("rmse: no evaluation times");
  const int n = trial.dim();
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
  for (const double t : eval_times) {
    const Eigen::VectorXd yhat = trial.eval_at(t).yhat;
    sq += (yhat - reference.at(t)).cwiseAbs2();
  }
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += std::sqrt(sq(k) / static_cast<double>(eval_times.size()));
  }
  return acc / static_cast<double>(n);
}

}  // namespace lieode
