#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lieode/linflow.hpp"
#include "oracles.hpp"

using lieode::AffineField;
using lieode::expm;
using lieode::flow;
using lieode::flow_table;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double max_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    worst = std::max(worst, oracles::rel_err(got(i), want(i)));
  }
  return worst;
}

AffineField random_field(oracles::Rng& rng, int n, double norm_cap) {
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    c(i) = rng.uniform(-1.0, 1.0);
  }
  double norm = 0.0;
  for (int j = 0; j < n; ++j) norm = std::max(norm, a.col(j).cwiseAbs().sum());
  if (norm > norm_cap) a *= norm_cap / norm;  // spectral radius <= 1-norm
  return AffineField(a, c);
}

}  // namespace

TEST_CASE("expm of zero is the identity") {
  const Eigen::MatrixXd e = expm(Eigen::MatrixXd::Zero(4, 4));
  CHECK(max_abs_diff(e, Eigen::MatrixXd::Identity(4, 4)) == 0.0);
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  const Eigen::MatrixXd e = expm(m);
  CHECK(oracles::rel_err(e(0, 0), std::exp(1.0)) <= 1e-14);
  CHECK(oracles::rel_err(e(1, 1), std::exp(-1.0)) <= 1e-14);
  CHECK(std::abs(e(0, 1)) == 0.0);
  CHECK(std::abs(e(1, 0)) == 0.0);
}

TEST_CASE("expm of a nilpotent matrix terminates the series") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = 1.0;
  Eigen::MatrixXd want(2, 2);
  want << 1.0, 1.0, 0.0, 1.0;
  CHECK(max_abs_diff(expm(m), want) <= 1e-15);
}

TEST_CASE("expm matches a 30-term scaled Taylor oracle") {
  oracles::Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd m(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) m(i, j) = rng.uniform(-0.25, 0.25);
    }
    const Eigen::MatrixXd got = expm(m);
    const Eigen::MatrixXd want = oracles::expm_taylor30(m);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) worst = std::max(worst, oracles::rel_err(got(i, j), want(i, j)));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("expm rejects bad input and overflow") {
  CHECK_THROWS_AS(expm(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXd nan2 = Eigen::MatrixXd::Zero(2, 2);
  nan2(0, 0) = std::nan("");
  CHECK_THROWS_AS(expm(nan2), std::invalid_argument);
  Eigen::MatrixXd huge = Eigen::MatrixXd::Identity(2, 2) * 1000.0;
  CHECK_THROWS_AS(expm(huge), std::overflow_error);
}

TEST_CASE("flow reproduces the uncoupled exponential base solution") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  a(2, 2) = -1.0;
  const AffineField field = AffineField::linear(a);
  Eigen::VectorXd y0(3);
  y0 << 0.5, 1.0, 2.0;

  const auto [y, dy] = flow(field, y0, 1.0);
  Eigen::VectorXd want(3);
  want << 0.5 * std::exp(1.0), std::exp(-1.0), 2.0 * std::exp(-1.0);
  CHECK(max_rel_err(y, want) <= 1e-14);
  CHECK(max_rel_err(dy, Eigen::VectorXd(a * want)) <= 1e-13);
}

TEST_CASE("flow of the rotation field traces the harmonic oscillator") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, -1.0, 1.0, 0.0;
  const AffineField field = AffineField::linear(a);
  Eigen::VectorXd y0(2);
  y0 << 1.0, 2.0;
  for (double t : {0.25, 1.0, 2.5, 7.0}) {
    const auto [y, dy] = flow(field, y0, t);
    Eigen::VectorXd want(2);
    want << std::cos(t) - 2.0 * std::sin(t), 2.0 * std::cos(t) + std::sin(t);
    CHECK(max_rel_err(y, want) <= 1e-13);
  }
}

TEST_CASE("flow handles a singular generator with constant and secular terms") {
  // x' = -z, y' = x, z' = -5.7 z from (1, 5, 10): closed form has a secular
  // -0.754386 t term in y because the generator has eigenvalue zero.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 2) = -1.0;
  a(1, 0) = 1.0;
  a(2, 2) = -5.7;
  const AffineField field = AffineField::linear(a);
  Eigen::VectorXd y0(3);
  y0 << 1.0, 5.0, 10.0;

  const double k = 10.0 / 5.7;
  for (double t : {0.1, 0.5, 1.0, 1.4}) {
    const auto [y, dy] = flow(field, y0, t);
    const double zbar = 10.0 * std::exp(-5.7 * t);
    const double xbar = (1.0 - k) + k * std::exp(-5.7 * t);
    const double ybar = (5.0 + k / 5.7) + (1.0 - k) * t - (k / 5.7) * std::exp(-5.7 * t);
    Eigen::VectorXd want(3);
    want << xbar, ybar, zbar;
    CHECK(max_rel_err(y, want) <= 1e-12);
  }

  // cross-check the derived closed form for y against an independent RK4 run
  auto rhs = [&](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return a * y; };
  const Eigen::VectorXd fine = oracles::rk4_integrate(rhs, y0, 0.0, 1.0, 20000);
  const double ybar1 = (5.0 + k / 5.7) + (1.0 - k) - (k / 5.7) * std::exp(-5.7);
  CHECK(std::abs(fine(1) - ybar1) <= 1e-9);
}

TEST_CASE("flow at t=0 returns the initial state exactly") {
  oracles::Rng rng(7);
  const AffineField field = random_field(rng, 4, 3.0);
  Eigen::VectorXd y0(4);
  for (int i = 0; i < 4; ++i) y0(i) = rng.uniform(-2.0, 2.0);
  const auto [y, dy] = flow(field, y0, 0.0);
  for (int i = 0; i < 4; ++i) CHECK(y(i) == y0(i));
  CHECK(max_abs_diff(dy, Eigen::VectorXd(field.A * y0 + field.c)) == 0.0);
}

TEST_CASE("flow table with a single time holds the initial point") {
  Eigen::MatrixXd a(1, 1);
  a << 2.0;
  Eigen::VectorXd c(1);
  c << -1.0;
  const AffineField field(a, c);
  Eigen::VectorXd y0(1);
  y0 << 3.0;
  const auto table = flow_table(field, y0, {0.0});
  REQUIRE(table.values.rows() == 1);
  CHECK(table.values(0, 0) == 3.0);
  CHECK(table.derivs(0, 0) == 5.0);
}

TEST_CASE("flow table on a uniform grid matches per-point flow") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = -1.0;
  a(2, 2) = -1.0;
  const AffineField field = AffineField::linear(a);
  Eigen::VectorXd y0(3);
  y0 << 0.5, 1.0, 2.0;

  std::vector<double> times(100);
  for (int i = 0; i < 100; ++i) times[i] = 3.0 * i / 99.0;
  const auto table = flow_table(field, y0, times);

  CHECK(table.values.row(0).transpose() == y0);  // exact at t=0
  for (int i = 0; i < 100; ++i) {
    const auto [y, dy] = flow(field, y0, times[i]);
    CHECK(max_rel_err(table.values.row(i).transpose(), y) <= 1e-12);
    // closed forms for this diagonal field
    Eigen::VectorXd want(3);
    want << 0.5 * std::exp(times[i]), std::exp(-times[i]), 2.0 * std::exp(-times[i]);
    CHECK(max_rel_err(table.values.row(i).transpose(), want) <= 1e-12);
    // deriv rows satisfy the field equation
    const Eigen::VectorXd resid =
        table.derivs.row(i).transpose() -
        (field.A * table.values.row(i).transpose() + field.c);
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("flow table falls back to per-point evaluation on ragged grids") {
  oracles::Rng rng(11);
  const AffineField field = random_field(rng, 3, 2.0);
  Eigen::VectorXd y0(3);
  for (int i = 0; i < 3; ++i) y0(i) = rng.uniform(-1.0, 1.0);
  std::vector<double> times = {0.0, 0.1, 0.35, 0.4, 1.0};
  const auto table = flow_table(field, y0, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto [y, dy] = flow(field, y0, times[i]);
    CHECK(max_abs_diff(table.values.row(i).transpose(), y) == 0.0);
  }
  CHECK_THROWS_AS(flow_table(field, y0, {0.0, 0.5, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(flow_table(field, y0, {}), std::invalid_argument);
}

TEST_CASE("flow satisfies the semigroup property") {
  oracles::Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(2, 5);
    const AffineField field = random_field(rng, n, 5.0);
    Eigen::VectorXd y0(n);
    for (int i = 0; i < n; ++i) y0(i) = rng.uniform(-2.0, 2.0);
    const double s = rng.uniform(0.0, 1.0);
    const double t = rng.uniform(0.0, 1.0);
    const Eigen::VectorXd direct = flow(field, y0, s + t).y;
    const Eigen::VectorXd two_step = flow(field, flow(field, y0, s).y, t).y;
    CHECK(max_rel_err(two_step, direct) <= 1e-10);
  }
}

TEST_CASE("flow time derivative passes a central-difference ratio test") {
  oracles::Rng rng(5150);
  const AffineField field = random_field(rng, 3, 2.0);
  Eigen::VectorXd y0(3);
  for (int i = 0; i < 3; ++i) y0(i) = rng.uniform(-1.0, 1.0);
  const double t = 0.7;
  const Eigen::VectorXd dy = flow(field, y0, t).dy;

  auto cd_err = [&](double h) {
    const Eigen::VectorXd hi = flow(field, y0, t + h).y;
    const Eigen::VectorXd lo = flow(field, y0, t - h).y;
    return ((hi - lo) / (2.0 * h) - dy).cwiseAbs().maxCoeff();
  };
  const double e1 = cd_err(1e-3);
  const double e2 = cd_err(5e-4);
  CHECK(e1 <= 1e-5);
  CHECK(e2 <= e1 / 3.0);  // O(h^2): halving h divides the error by ~4
}
