#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace lieode {

// Single-hidden-layer tanh network with scalar input and scalar output:
//   N(t) = sum_j w2_j * tanh(w1_j * t + b1_j) + b2
// One independent net serves each solution component; no weight sharing.
struct ScalarNet {
  Eigen::VectorXd w1;  // input weights, length m
  Eigen::VectorXd b1;  // hidden biases, length m
  Eigen::VectorXd w2;  // output weights, length m
  double b2 = 0.0;

  int width() const { return static_cast<int>(w1.size()); }
  int param_count() const { return 3 * width() + 1; }

  // Parameter vector layout: [w1, b1, w2, b2].  Round-trips bit-exactly.
  Eigen::VectorXd flatten() const;
  static ScalarNet unflatten(int m, const Eigen::VectorXd& p);
};

// Value and every derivative the residual loss needs, from one pass.
struct NetEval {
  double value = 0.0;        // N
  double dt = 0.0;           // dN/dt
  Eigen::VectorXd grad_p;    // dN/dp,        length 3m+1
  Eigen::VectorXd grad_p_dt; // d(dN/dt)/dp,  length 3m+1
};

// Seeded start: w1, b1 uniform(-1,1); w2 uniform(-1,1)/sqrt(m); b2 = 0.
// Same seed gives a bit-identical net.
ScalarNet init_net(int m, std::uint64_t seed);

double forward(const ScalarNet& net, double t);

NetEval eval_full(const ScalarNet& net, double t);

}  // namespace lieode
