#include "lieode/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lieode {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-minus-4th order weights for the error estimate
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double initial_step(const OdeSystem& sys, double t0, const Eigen::VectorXd& y0,
                    const Eigen::VectorXd& f0, double t1, double rtol, double atol) {
  const int n = sys.dim;
  double dnf = 0.0, dny = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0(i));
    dnf += (f0(i) / sk) * (f0(i) / sk);
    dny += (y0(i) / sk) * (y0(i) / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, t1 - t0);

  const Eigen::VectorXd y1 = y0 + h * f0;
  const Eigen::VectorXd f1 = sys.rhs(t0 + h, y1);
  double der2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sk = atol + rtol * std::abs(y0(i));
    der2 += ((f1(i) - f0(i)) / sk) * ((f1(i) - f0(i)) / sk);
  }
  der2 = std::sqrt(der2) / h;

  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 =
      (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, t1 - t0});
}

}  // namespace

Eigen::VectorXd DenseSolution::at(double t) const {
  const double lo = times.front(), hi = times.back();
  const double slack = 1e-9 * std::max(1.0, hi - lo);
  if (t < lo - slack || t > hi + slack) {
    std::ostringstream msg;
    msg << "dense solution queried at t=" << t << " outside [" << lo << ", " << hi << "]";
    throw std::out_of_range(msg.str());
  }
  t = std::clamp(t, lo, hi);

  const auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - times.begin() - 1, 0));
  if (i > times.size() - 2) i = times.size() - 2;
  if (t == times[i]) return states[i];
  if (t == times[i + 1]) return states[i + 1];

  const double h = times[i + 1] - times[i];
  const double th = (t - times[i]) / h;
  const double th2 = th * th, th3 = th2 * th;
  const double h00 = 2 * th3 - 3 * th2 + 1;
  const double h10 = th3 - 2 * th2 + th;
  const double h01 = -2 * th3 + 3 * th2;
  const double h11 = th3 - th2;
  return h00 * states[i] + (h10 * h) * derivs[i] + h01 * states[i + 1] +
         (h11 * h) * derivs[i + 1];
}

Eigen::MatrixXd DenseSolution::sample(const std::vector<double>& query_times) const {
  const int n = static_cast<int>(states.front().size());
  Eigen::MatrixXd out(static_cast<int>(query_times.size()), n);
  for (std::size_t i = 0; i < query_times.size(); ++i) {
    out.row(i) = at(query_times[i]).transpose();
  }
  return out;
}

DenseSolution rk4(const OdeSystem& system, double t0, double t1, int steps) {
  if (steps < 1) throw std::invalid_argument("rk4: steps must be >= 1");
  if (!(t1 > t0)) throw std::invalid_argument("rk4: need t1 > t0");

  const double h = (t1 - t0) / steps;
  DenseSolution sol;
  sol.accepted = steps;
  sol.times.reserve(steps + 1);
  sol.states.reserve(steps + 1);
  sol.derivs.reserve(steps + 1);

  Eigen::VectorXd y = system.y0;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const Eigen::VectorXd k1 = system.rhs(t, y);
    sol.times.push_back(t);
    sol.states.push_back(y);
    sol.derivs.push_back(k1);
    const Eigen::VectorXd k2 = system.rhs(t + 0.5 * h, Eigen::VectorXd(y + 0.5 * h * k1));
    const Eigen::VectorXd k3 = system.rhs(t + 0.5 * h, Eigen::VectorXd(y + 0.5 * h * k2));
    const Eigen::VectorXd k4 = system.rhs(t + h, Eigen::VectorXd(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  sol.times.push_back(t1);
  sol.states.push_back(y);
  sol.derivs.push_back(system.rhs(t1, y));
  return sol;
}

DenseSolution rk45(const OdeSystem& system, double t0, double t1, double rtol,
                   double atol) {
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw std::invalid_argument("rk45: tolerances must be positive");
  }
  if (!(t1 > t0)) throw std::invalid_argument("rk45: need t1 > t0");
  const int n = system.dim;

  // The cubic Hermite interpolant between knots is one order below the pair,
  // so steps sized for the requested tolerance alone would leave sampled
  // values several times less accurate than knot values.  A 100x internal
  // headroom shrinks steps by ~10^(2/5), putting interpolated output inside
  // the requested band as well.
  const double rtol_i = rtol * 1e-2;
  const double atol_i = atol * 1e-2;

  // PI controller constants (standard choices for this pair)
  const double beta = 0.04;
  const double expo1 = 0.2 - beta * 0.75;
  const double safe = 0.9;
  const double facc1 = 1.0 / 0.2;  // max shrink factor per step
  const double facc2 = 1.0 / 10.0; // max growth factor per step
  const long max_steps = 500000;

  DenseSolution sol;
  sol.rtol = rtol;
  sol.atol = atol;

  double t = t0;
  Eigen::VectorXd y = system.y0;
  Eigen::VectorXd k1 = system.rhs(t, y);
  sol.times.push_back(t);
  sol.states.push_back(y);
  sol.derivs.push_back(k1);

  double h = initial_step(system, t0, y, k1, t1, rtol_i, atol_i);
  double facold = 1e-4;
  bool reject = false;
  bool last = false;

  for (long nstep = 0;; ++nstep) {
    if (nstep > max_steps) {
      std::ostringstream msg;
      msg << "rk45: exceeded " << max_steps << " steps at t=" << t;
      throw std::runtime_error(msg.str());
    }
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(t), 1.0);
    if (h < h_floor) {
      std::ostringstream msg;
      msg << "rk45: step size underflow at t=" << t;
      throw std::runtime_error(msg.str());
    }
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }

    const Eigen::VectorXd k2 = system.rhs(t + c2 * h, Eigen::VectorXd(y + h * (a21 * k1)));
    const Eigen::VectorXd k3 =
        system.rhs(t + c3 * h, Eigen::VectorXd(y + h * (a31 * k1 + a32 * k2)));
    const Eigen::VectorXd k4 =
        system.rhs(t + c4 * h, Eigen::VectorXd(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
    const Eigen::VectorXd k5 = system.rhs(
        t + c5 * h, Eigen::VectorXd(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
    const Eigen::VectorXd k6 = system.rhs(
        t + h,
        Eigen::VectorXd(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
    const Eigen::VectorXd y_new =
        y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Eigen::VectorXd k7 = system.rhs(t + h, y_new);  // FSAL

    const Eigen::VectorXd err_vec =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sk = atol_i + rtol_i * std::max(std::abs(y(i)), std::abs(y_new(i)));
      err += (err_vec(i) / sk) * (err_vec(i) / sk);
    }
    err = std::sqrt(err / n);

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0 && std::isfinite(err)) {
      facold = std::max(err, 1e-4);
      ++sol.accepted;
      t += h;
      y = y_new;
      k1 = k7;
      sol.times.push_back(t);
      sol.states.push_back(y);
      sol.derivs.push_back(k1);
      if (last) break;
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double h_new = h / fac;
      if (reject) h_new = std::min(h_new, h);
      reject = false;
      h = h_new;
    } else {
      ++sol.rejected;
      reject = true;
      last = false;
      const double shrink =
          std::isfinite(fac11) ? std::min(facc1, fac11 / safe) : facc1;
      h = h / shrink;
    }
  }
  return sol;
}

}  // namespace lieode
