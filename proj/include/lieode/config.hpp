#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lieode/linflow.hpp"
#include "lieode/system.hpp"
#include "lieode/training.hpp"

namespace lieode {

// Config problems carry the offending field name; the CLI maps them to exit 1.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Inline system given as expression strings over y1..y<dim> plus named params.
struct CustomSystemSpec {
  int dim = 0;
  std::vector<std::string> rhs;
  std::map<std::string, double> params;
  Eigen::VectorXd y0;
  Eigen::MatrixXd linear_A;  // empty means zero
  Eigen::VectorXd linear_c;  // empty means zero
};

struct ExperimentConfig {
  std::string preset;  // builtin name; empty when `custom` is set
  std::optional<CustomSystemSpec> custom;
  double train_start = 0.0;
  double train_end = 0.0;
  int n_points = 0;
  int hidden_units = 0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 1;
  int restarts = 1;
  double test_start = 0.0;
  double test_end = 0.0;
  int test_points = 200;
  bool paper_literal_base = false;
  std::string output_dir = "out";
};

// Preset defaults: published grid/width settings, 1000 BFGS iterations,
// best-of-5 starts (10 for van_der_pol), seed 1.
ExperimentConfig config_from_preset(const std::string& name);

// Parse + validate; throws ConfigError naming the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Full echo; config_from_json(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Everything the pipelines need, resolved from a validated config.
struct Experiment {
  OdeSystem system;
  AffineField linear;
  BaseFlow base;       // flow actually used by the trial solution
  bool literal_base = false;
  std::optional<double> reported_loss;
  std::optional<double> reported_rmse;
};

Experiment materialize(const ExperimentConfig& cfg);

}  // namespace lieode
