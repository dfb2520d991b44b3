// Times the residual-loss kernel serially and with the OpenMP team, checks
// that both give bit-identical results, and prints the speedup.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "lieode/net.hpp"
#include "lieode/rng.hpp"
#include "lieode/run.hpp"
#include "lieode/system.hpp"
#include "lieode/training.hpp"
#include "lieode/trial.hpp"

namespace {

double time_evals(lieode::ResidualLoss& loss, const Eigen::VectorXd& p, int reps,
                  double& value) {
  Eigen::VectorXd grad;
  value = loss(p, grad);  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) value = loss(p, grad);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
         reps;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string preset = argc > 1 ? argv[1] : "food_chain";
  const int n_points = argc > 2 ? std::atoi(argv[2]) : 400;
  const int m = argc > 3 ? std::atoi(argv[3]) : 100;
  const int reps = argc > 4 ? std::atoi(argv[4]) : 50;

  const auto ps = lieode::builtin(preset);
  std::vector<lieode::ScalarNet> nets;
  for (int k = 0; k < ps.system.dim; ++k) nets.push_back(lieode::init_net(m, 7 + k));
  const auto grid = lieode::linspace(ps.train_start, ps.train_end, n_points);

  lieode::TrialSolution trial(ps.linear_part, ps.system.y0, nets, grid);
  lieode::ResidualLoss serial(trial, ps.system, 1);
  lieode::ResidualLoss parallel(trial, ps.system, lieode::default_threads());

  Eigen::VectorXd p(serial.param_count());
  lieode::Rng rng(99);
  for (int i = 0; i < p.size(); ++i) p(i) = rng.uniform(-0.5, 0.5);

  double v1 = 0.0, vn = 0.0;
  const double t1 = time_evals(serial, p, reps, v1);
  const double tn = time_evals(parallel, p, reps, vn);

  std::printf("preset=%s points=%d hidden=%d reps=%d\n", preset.c_str(), n_points, m, reps);
  std::printf("serial:   %10.6f ms/eval  L=%s\n", 1e3 * t1, lieode::fmt17(v1).c_str());
  std::printf("threads=%d: %10.6f ms/eval  L=%s\n", parallel.threads(), 1e3 * tn,
              lieode::fmt17(vn).c_str());
  std::printf("speedup: %.2fx  bit_identical: %s\n", t1 / tn, v1 == vn ? "yes" : "NO");
  return v1 == vn ? 0 : 1;
}
