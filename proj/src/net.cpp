#include "lieode/net.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lieode/net_json.hpp"
#include "lieode/rng.hpp"

namespace lieode {

Eigen::VectorXd ScalarNet::flatten() const {
  const int m = width();
  Eigen::VectorXd p(3 * m + 1);
  p.segment(0, m) = w1;
  p.segment(m, m) = b1;
  p.segment(2 * m, m) = w2;
  p(3 * m) = b2;
  return p;
}

ScalarNet ScalarNet::unflatten(int m, const Eigen::VectorXd& p) {
  if (m < 1) throw std::invalid_argument("unflatten: width must be >= 1");
  if (p.size() != 3 * m + 1) {
    throw std::invalid_argument("unflatten: parameter vector must have length 3m+1");
  }
  ScalarNet net;
  net.w1 = p.segment(0, m);
  net.b1 = p.segment(m, m);
  net.w2 = p.segment(2 * m, m);
  net.b2 = p(3 * m);
  return net;
}

ScalarNet init_net(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("init_net: width must be >= 1");
  Rng rng(seed);
  ScalarNet net;
  net.w1.resize(m);
  net.b1.resize(m);
  net.w2.resize(m);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (int j = 0; j < m; ++j) net.w1(j) = rng.uniform(-1.0, 1.0);
  for (int j = 0; j < m; ++j) net.b1(j) = rng.uniform(-1.0, 1.0);
  for (int j = 0; j < m; ++j) net.w2(j) = rng.uniform(-1.0, 1.0) * scale;
  net.b2 = 0.0;
  return net;
}

double forward(const ScalarNet& net, double t) {
  double acc = net.b2;
  const int m = net.width();
  for (int j = 0; j < m; ++j) {
    acc += net.w2(j) * std::tanh(net.w1(j) * t + net.b1(j));
  }
  return acc;
}

NetEval eval_full(const ScalarNet& net, double t) {
  const int m = net.width();
  NetEval out;
  out.grad_p.resize(3 * m + 1);
  out.grad_p_dt.resize(3 * m + 1);

  double value = net.b2;
  double dt = 0.0;
  for (int j = 0; j < m; ++j) {
    const double w1j = net.w1(j);
    const double w2j = net.w2(j);
    const double s = std::tanh(w1j * t + net.b1(j));
    const double d = 1.0 - s * s;  // tanh'
    value += w2j * s;
    dt += w2j * w1j * d;

    out.grad_p(j) = w2j * d * t;
    out.grad_p(m + j) = w2j * d;
    out.grad_p(2 * m + j) = s;

    // d/dp of dN/dt; the -2 s d factor is tanh''
    out.grad_p_dt(j) = w2j * d - 2.0 * w2j * w1j * s * d * t;
    out.grad_p_dt(m + j) = -2.0 * w2j * w1j * s * d;
    out.grad_p_dt(2 * m + j) = w1j * d;
  }
  out.grad_p(3 * m) = 1.0;
  out.grad_p_dt(3 * m) = 0.0;
  out.value = value;
  out.dt = dt;
  return out;
}

void to_json(nlohmann::json& j, const ScalarNet& net) {
  const int m = net.width();
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  j = nlohmann::json{{"m", m},
                     {"w1", vec(net.w1)},
                     {"b1", vec(net.b1)},
                     {"w2", vec(net.w2)},
                     {"b2", net.b2}};
}

void from_json(const nlohmann::json& j, ScalarNet& net) {
  const int m = j.at("m").get<int>();
  const auto w1 = j.at("w1").get<std::vector<double>>();
  const auto b1 = j.at("b1").get<std::vector<double>>();
  const auto w2 = j.at("w2").get<std::vector<double>>();
  if (static_cast<int>(w1.size()) != m || static_cast<int>(b1.size()) != m ||
      static_cast<int>(w2.size()) != m) {
    throw std::invalid_argument("ScalarNet json: weight arrays must have length m");
  }
  net.w1 = Eigen::Map<const Eigen::VectorXd>(w1.data(), m);
  net.b1 = Eigen::Map<const Eigen::VectorXd>(b1.data(), m);
  net.w2 = Eigen::Map<const Eigen::VectorXd>(w2.data(), m);
  net.b2 = j.at("b2").get<double>();
}

}  // namespace lieode
