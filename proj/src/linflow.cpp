#include "lieode/linflow.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace lieode {
namespace {

double one_norm(const Eigen::MatrixXd& m) {
  double norm = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    norm = std::max(norm, m.col(j).cwiseAbs().sum());
  }
  return norm;
}

// Augmented propagator matrix [[A, c], [0, 0]] scaled by t.
Eigen::MatrixXd augmented(const AffineField& field, double t) {
  const int n = field.dim();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = t * field.A;
  aug.topRightCorner(n, 1) = t * field.c;
  return aug;
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!m.allFinite()) throw std::invalid_argument("expm: matrix has non-finite entries");
  const Eigen::Index n = m.rows();

  // Scale so the 1-norm drops to <= 0.5, sum the series, square back up.
  double norm = one_norm(m);
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const Eigen::MatrixXd scaled = m / std::exp2(squarings);

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 64; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    if (one_norm(term) < 1e-17 * one_norm(sum)) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;

  if (!sum.allFinite()) throw std::overflow_error("expm: result overflows double range");
  return sum;
}

AffineField::AffineField(Eigen::MatrixXd a, Eigen::VectorXd c_in)
    : A(std::move(a)), c(std::move(c_in)) {
  if (A.rows() != A.cols()) throw std::invalid_argument("AffineField: A must be square");
  if (c.size() != A.rows()) throw std::invalid_argument("AffineField: c length must match A");
}

AffineField AffineField::linear(Eigen::MatrixXd a) {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(a.rows());
  return AffineField(std::move(a), std::move(zero));
}

FlowResult flow(const AffineField& field, const Eigen::VectorXd& y0, double t) {
  const int n = field.dim();
  if (y0.size() != n) throw std::invalid_argument("flow: y0 length must match field");
  if (!std::isfinite(t)) throw std::invalid_argument("flow: t must be finite");

  if (t == 0.0) return {y0, field.A * y0 + field.c};

  const Eigen::MatrixXd prop = expm(augmented(field, t));
  Eigen::VectorXd z(n + 1);
  z.head(n) = y0;
  z(n) = 1.0;
  const Eigen::VectorXd w = prop * z;
  Eigen::VectorXd y = w.head(n);
  Eigen::VectorXd dy = field.A * y + field.c;
  return {std::move(y), std::move(dy)};
}

FlowTable flow_table(const AffineField& field, const Eigen::VectorXd& y0,
                     const std::vector<double>& times) {
  const int n = field.dim();
  const int count = static_cast<int>(times.size());
  if (count == 0) throw std::invalid_argument("flow_table: empty time grid");
  for (int i = 1; i < count; ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("flow_table: times must be strictly ascending");
    }
  }

  FlowTable table;
  table.times = times;
  table.values.resize(count, n);
  table.derivs.resize(count, n);

  bool uniform = count >= 3;
  const double h = count >= 2 ? times[1] - times[0] : 0.0;
  for (int i = 1; i < count && uniform; ++i) {
    if (std::abs((times[i] - times[i - 1]) - h) > 1e-12 * std::max(1.0, std::abs(h))) {
      uniform = false;
    }
  }

  if (uniform) {
    const Eigen::MatrixXd step = expm(augmented(field, h));
    Eigen::VectorXd z(n + 1);
    z.head(n) = flow(field, y0, times[0]).y;
    z(n) = 1.0;
    for (int i = 0; i < count; ++i) {
      table.values.row(i) = z.head(n).transpose();
      if (i + 1 < count) z = step * z;
    }
  } else {
    for (int i = 0; i < count; ++i) {
      table.values.row(i) = flow(field, y0, times[i]).y.transpose();
    }
  }
  for (int i = 0; i < count; ++i) {
    table.derivs.row(i) =
        (field.A * table.values.row(i).transpose() + field.c).transpose();
  }
  return table;
}

}  // namespace lieode
