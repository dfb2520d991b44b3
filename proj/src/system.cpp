#include "lieode/system.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "lieode/expr.hpp"
#include "lieode/rng.hpp"

namespace lieode {
namespace {

Eigen::VectorXd vec3(double a, double b, double c) {
  Eigen::VectorXd v(3);
  v << a, b, c;
  return v;
}

SystemPreset make_food_chain() {
  const double a = 1.0, b = 1.0, c = 1.0, d = 1.0, e = 1.0, f = 1.0, g = 1.0;
  OdeSystem sys;
  sys.name = "food_chain";
  sys.dim = 3;
  sys.params = {{"a", a}, {"b", b}, {"c", c}, {"d", d}, {"e", e}, {"f", f}, {"g", g}};
  sys.y0 = vec3(0.5, 1.0, 2.0);
  sys.time_horizon = 3.0;
  sys.rhs = [=](double, const Eigen::VectorXd& y) {
    return vec3(a * y(0) - b * y(0) * y(1),
                -c * y(1) + d * y(0) * y(1) - e * y(1) * y(2),
                -f * y(2) + g * y(1) * y(2));
  };
  sys.jacobian = [=](double, const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(3, 3);
    j << a - b * y(1), -b * y(0), 0.0,
         d * y(1), -c + d * y(0) - e * y(2), -e * y(1),
         0.0, g * y(2), -f + g * y(1);
    return j;
  };

  Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(3, 3);
  lin(0, 0) = a;
  lin(1, 1) = -c;
  lin(2, 2) = -f;

  SystemPreset preset{std::move(sys), AffineField::linear(lin),
                      0.0, 3.0, 100, 100, 0.0, 3.5, 200, 7.303e-5, 0.00851};
  return preset;
}

SystemPreset make_van_der_pol() {
  const double mu = 1.0;
  OdeSystem sys;
  sys.name = "van_der_pol";
  sys.dim = 2;
  sys.params = {{"mu", mu}};
  sys.y0 = Eigen::VectorXd(2);
  sys.y0 << 1.0, 2.0;
  sys.time_horizon = 10.0;
  sys.rhs = [=](double, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(2);
    out << mu * (y(0) - y(0) * y(0) * y(0) / 3.0 - y(1)), y(0) / mu;
    return out;
  };
  sys.jacobian = [=](double, const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(2, 2);
    j << mu * (1.0 - y(0) * y(0)), -mu, 1.0 / mu, 0.0;
    return j;
  };

  Eigen::MatrixXd lin(2, 2);
  lin << 0.0, -mu, 1.0 / mu, 0.0;

  SystemPreset preset{std::move(sys), AffineField::linear(lin),
                      0.0, 10.0, 40, 50, 0.0, 11.0, 200, 2.07e-4, 0.082};
  return preset;
}

SystemPreset make_lorenz() {
  const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0;
  OdeSystem sys;
  sys.name = "lorenz";
  sys.dim = 3;
  sys.params = {{"sigma", sigma}, {"rho", rho}, {"beta", beta}};
  sys.y0 = vec3(1.0, 5.0, 10.0);
  sys.time_horizon = 0.5;
  sys.rhs = [=](double, const Eigen::VectorXd& y) {
    return vec3(sigma * (y(1) - y(0)),
                y(0) * (rho - y(2)) - y(1),
                y(0) * y(1) - beta * y(2));
  };
  sys.jacobian = [=](double, const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(3, 3);
    j << -sigma, sigma, 0.0,
         rho - y(2), -1.0, -y(0),
         y(1), y(0), -beta;
    return j;
  };

  // Diagonal affine part: each component decays at its own linear rate, so
  // the base solution stays an exact flow of a genuine sub-operator.
  Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(3, 3);
  lin(0, 0) = -sigma;
  lin(1, 1) = -1.0;
  lin(2, 2) = -beta;

  SystemPreset preset{std::move(sys), AffineField::linear(lin),
                      0.0, 0.5, 40, 30, 0.0, 0.6, 200,
                      std::nullopt, std::nullopt};
  return preset;
}

SystemPreset make_rossler() {
  const double a = 0.2, b = 0.2, c = 5.7;
  OdeSystem sys;
  sys.name = "rossler";
  sys.dim = 3;
  sys.params = {{"a", a}, {"b", b}, {"c", c}};
  sys.y0 = vec3(1.0, 5.0, 10.0);
  sys.time_horizon = 1.0;
  sys.rhs = [=](double, const Eigen::VectorXd& y) {
    return vec3(-y(1) - y(2), y(0) + a * y(1), b + y(2) * (y(0) - c));
  };
  sys.jacobian = [=](double, const Eigen::VectorXd& y) {
    Eigen::MatrixXd j(3, 3);
    j << 0.0, -1.0, -1.0,
         1.0, a, 0.0,
         y(2), 0.0, y(0) - c;
    return j;
  };

  Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(3, 3);
  lin(0, 2) = -1.0;
  lin(1, 0) = 1.0;
  lin(2, 2) = -c;

  SystemPreset preset{std::move(sys), AffineField::linear(lin),
                      0.0, 1.0, 40, 50, 0.0, 1.4, 200, 3.266e-6, 4.747e-5};
  return preset;
}

}  // namespace

SystemPreset builtin(const std::string& name) {
  if (name == "food_chain") return make_food_chain();
  if (name == "van_der_pol") return make_van_der_pol();
  if (name == "lorenz") return make_lorenz();
  if (name == "rossler") return make_rossler();
  throw std::invalid_argument("unknown preset '" + name +
                              "' (expected food_chain, van_der_pol, lorenz or rossler)");
}

std::vector<std::string> builtin_names() {
  return {"food_chain", "van_der_pol", "lorenz", "rossler"};
}

BaseFlow reported_base(const std::string& name) {
  if (name == "food_chain") {
    return [](double t) -> FlowResult {
      return {vec3(0.5 * std::exp(t), std::exp(-t), 2.0 * std::exp(-t)),
              vec3(0.5 * std::exp(t), -std::exp(-t), -2.0 * std::exp(-t))};
    };
  }
  if (name == "van_der_pol") {
    return [](double t) -> FlowResult {
      Eigen::VectorXd y(2), dy(2);
      y << std::cos(t) - 2.0 * std::sin(t), 2.0 * std::cos(t) + std::sin(t);
      dy << -std::sin(t) - 2.0 * std::cos(t), -2.0 * std::sin(t) + std::cos(t);
      return {std::move(y), std::move(dy)};
    };
  }
  if (name == "lorenz") {
    // published formulas use e^{-28t} on the third component, not e^{-beta t}
    return [](double t) -> FlowResult {
      return {vec3(std::exp(-10.0 * t), 5.0 * std::exp(-t), 10.0 * std::exp(-28.0 * t)),
              vec3(-10.0 * std::exp(-10.0 * t), -5.0 * std::exp(-t),
                   -280.0 * std::exp(-28.0 * t))};
    };
  }
  if (name == "rossler") {
    // rounded printed constants; note y(0) is 1.000004, not exactly 1, and the
    // second component omits the secular -0.754386*t term of the exact flow
    return [](double t) -> FlowResult {
      const double decay = std::exp(-5.7 * t);
      return {vec3(-0.754386 + 1.75439 * decay, 5.30779 - 0.307787 * decay,
                   10.0 * decay),
              vec3(-5.7 * 1.75439 * decay, 5.7 * 0.307787 * decay, -57.0 * decay)};
    };
  }
  throw std::invalid_argument("unknown preset '" + name + "' for reported base");
}

OdeSystem from_expressions(int dim, const std::vector<std::string>& rhs_sources,
                           const std::map<std::string, double>& params,
                           const Eigen::VectorXd& y0, double horizon) {
  if (dim < 1) throw std::invalid_argument("from_expressions: dim must be >= 1");
  if (static_cast<int>(rhs_sources.size()) != dim) {
    throw std::invalid_argument("from_expressions: need exactly dim rhs expressions");
  }
  if (y0.size() != dim) throw std::invalid_argument("from_expressions: y0 length must be dim");

  std::vector<std::string> state_names(dim);
  for (int i = 0; i < dim; ++i) state_names[i] = "y" + std::to_string(i + 1);

  std::vector<std::string> param_names;
  std::vector<double> param_values;
  for (const auto& [key, value] : params) {  // std::map iterates sorted
    param_names.push_back(key);
    param_values.push_back(value);
  }

  auto exprs = std::make_shared<std::vector<Expr>>();
  for (const auto& src : rhs_sources) {
    exprs->push_back(parse_expression(src, state_names, param_names));
  }
  auto pvals = std::make_shared<std::vector<double>>(std::move(param_values));

  OdeSystem sys;
  sys.name = "custom";
  sys.dim = dim;
  sys.params = params;
  sys.y0 = y0;
  sys.time_horizon = horizon;
  sys.rhs = [exprs, pvals, dim](double t, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(dim);
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    for (int i = 0; i < dim; ++i) out(i) = (*exprs)[i].eval(t, ys, *pvals);
    return out;
  };
  sys.jacobian = [exprs, pvals, dim](double t, const Eigen::VectorXd& y) {
    Eigen::MatrixXd jac(dim, dim);
    const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    for (int j = 0; j < dim; ++j) {
      for (int i = 0; i < dim; ++i) {
        jac(i, j) = (*exprs)[i].eval_dual(t, ys, *pvals, j).deriv;
      }
    }
    return jac;
  };
  return sys;
}

JacobianReport jacobian_check(const OdeSystem& system, int trials, double tol,
                              std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("jacobian_check: trials must be >= 1");
  const int n = system.dim;
  Rng rng(seed);

  JacobianReport report;
  report.trials = trials;
  report.tol = tol;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = system.y0(i) + rng.uniform(-1.0, 1.0);
    const double t = rng.uniform(0.0, std::max(system.time_horizon, 1e-6));
    const Eigen::MatrixXd analytic = system.jacobian(t, y);
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(y(j)));
      Eigen::VectorXd hi = y, lo = y;
      hi(j) += h;
      lo(j) -= h;
      const Eigen::VectorXd diff = (system.rhs(t, hi) - system.rhs(t, lo)) / (2.0 * h);
      for (int i = 0; i < n; ++i) {
        const double denom = std::max({1.0, std::abs(diff(i)), std::abs(analytic(i, j))});
        report.max_rel_err =
            std::max(report.max_rel_err, std::abs(diff(i) - analytic(i, j)) / denom);
      }
    }
  }
  report.pass = report.max_rel_err <= tol;
  return report;
}

}  // namespace lieode
