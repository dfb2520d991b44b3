#include "lieode/config.hpp"

#include <fstream>
#include <utility>

namespace lieode {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field, message);
}

const json& require(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(key, "required field is missing");
  return *it;
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

int as_count(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 1) fail(field, "must be positive");
  return static_cast<int>(v);
}

void read_interval(const json& j, const std::string& field, double& lo, double& hi) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(field, "expected [start, end]");
  }
  lo = j[0].get<double>();
  hi = j[1].get<double>();
  if (!(lo < hi)) fail(field, "start must be less than end");
  if (lo < 0.0) fail(field, "must start at t >= 0 (initial condition sits at t=0)");
}

Eigen::VectorXd read_vector(const json& j, const std::string& field, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    fail(field, "expected an array of length " + std::to_string(dim));
  }
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[i].is_number()) fail(field, "expected numeric entries");
    v(i) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& field, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    fail(field, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    m.row(i) = read_vector(j[i], field, dim).transpose();
  }
  return m;
}

CustomSystemSpec read_custom(const json& j) {
  CustomSystemSpec spec;
  spec.dim = as_count(require(j, "dim"), "system.dim");

  const json& rhs = require(j, "rhs");
  if (!rhs.is_array() || static_cast<int>(rhs.size()) != spec.dim) {
    fail("system.rhs", "expected " + std::to_string(spec.dim) + " expression strings");
  }
  for (const auto& e : rhs) {
    if (!e.is_string()) fail("system.rhs", "expected expression strings");
    spec.rhs.push_back(e.get<std::string>());
  }

  if (j.contains("params")) {
    const json& params = j.at("params");
    if (!params.is_object()) fail("system.params", "expected an object of name: value");
    for (const auto& [name, value] : params.items()) {
      if (!value.is_number()) fail("system.params", "parameter '" + name + "' must be a number");
      spec.params[name] = value.get<double>();
    }
  }

  spec.y0 = read_vector(require(j, "y0"), "system.y0", spec.dim);
  if (j.contains("linear_A")) {
    spec.linear_A = read_matrix(j.at("linear_A"), "system.linear_A", spec.dim);
  }
  if (j.contains("linear_c")) {
    spec.linear_c = read_vector(j.at("linear_c"), "system.linear_c", spec.dim);
  }
  if (spec.linear_c.size() > 0 && spec.linear_A.size() == 0) {
    fail("system.linear_c", "linear_c without linear_A");
  }
  return spec;
}

OptimizerConfig read_optimizer(const json& j) {
  OptimizerConfig opt;
  if (!j.is_object()) fail("optimizer", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "method") {
      if (!value.is_string()) fail("optimizer.method", "expected a string");
      std::string m = value.get<std::string>();
      if (m == "gd") m = "gradient_descent";
      if (m != "bfgs" && m != "gradient_descent") {
        fail("optimizer.method", "unknown method '" + m + "' (bfgs or gradient_descent)");
      }
      opt.method = m;
    } else if (key == "max_iters") {
      opt.max_iters = as_count(value, "optimizer.max_iters");
    } else if (key == "grad_tol") {
      opt.grad_tol = as_number(value, "optimizer.grad_tol");
    } else if (key == "loss_tol") {
      opt.loss_tol = as_number(value, "optimizer.loss_tol");
    } else if (key == "wolfe_c1") {
      opt.wolfe_c1 = as_number(value, "optimizer.wolfe_c1");
    } else if (key == "wolfe_c2") {
      opt.wolfe_c2 = as_number(value, "optimizer.wolfe_c2");
    } else {
      fail("optimizer." + key, "unknown field");
    }
  }
  if (!(opt.wolfe_c1 > 0.0 && opt.wolfe_c1 < opt.wolfe_c2 && opt.wolfe_c2 < 1.0)) {
    fail("optimizer.wolfe_c1", "need 0 < wolfe_c1 < wolfe_c2 < 1");
  }
  return opt;
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.preset.empty() == !cfg.custom.has_value()) {
    fail("system", "exactly one of preset name or inline system must be given");
  }
  if (!(cfg.train_start < cfg.train_end)) fail("train_interval", "start must be less than end");
  if (cfg.train_start < 0.0) fail("train_interval", "must start at t >= 0");
  if (!(cfg.test_start < cfg.test_end)) fail("test_interval", "start must be less than end");
  if (cfg.test_start < 0.0) fail("test_interval", "must start at t >= 0");
  if (cfg.n_points < 2) fail("n_points", "need at least 2 collocation points");
  if (cfg.test_points < 2) fail("test_points", "need at least 2 evaluation points");
  if (cfg.hidden_units < 1) fail("hidden_units", "must be positive");
  if (cfg.restarts < 1) fail("restarts", "must be positive");
  if (cfg.paper_literal_base && cfg.preset.empty()) {
    fail("paper_literal_base", "only available for builtin presets");
  }
  if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
}

}  // namespace

ExperimentConfig config_from_preset(const std::string& name) {
  SystemPreset preset;
  try {
    preset = builtin(name);
  } catch (const std::invalid_argument& ex) {
    fail("system", ex.what());
  }
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.train_start = preset.train_start;
  cfg.train_end = preset.train_end;
  cfg.n_points = preset.n_points;
  cfg.hidden_units = preset.hidden_units;
  cfg.test_start = preset.test_start;
  cfg.test_end = preset.test_end;
  cfg.test_points = preset.test_points;
  cfg.restarts = name == "van_der_pol" ? 10 : 5;
  return cfg;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail("config", "expected a JSON object");

  ExperimentConfig cfg;
  const json& system = require(j, "system");
  if (system.is_string()) {
    cfg = config_from_preset(system.get<std::string>());
  } else if (system.is_object()) {
    cfg.custom = read_custom(system);
    // inline systems have no published defaults; grid and width are required
    require(j, "train_interval");
    require(j, "n_points");
    require(j, "hidden_units");
  } else {
    fail("system", "expected a preset name or an inline system object");
  }

  if (j.contains("train_interval")) {
    read_interval(j.at("train_interval"), "train_interval", cfg.train_start, cfg.train_end);
  }
  if (j.contains("n_points")) cfg.n_points = as_count(j.at("n_points"), "n_points");
  if (j.contains("hidden_units")) cfg.hidden_units = as_count(j.at("hidden_units"), "hidden_units");
  if (j.contains("optimizer")) cfg.optimizer = read_optimizer(j.at("optimizer"));
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || s.get<long long>() < 0) {
      fail("seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("restarts")) cfg.restarts = as_count(j.at("restarts"), "restarts");
  if (j.contains("test_interval")) {
    read_interval(j.at("test_interval"), "test_interval", cfg.test_start, cfg.test_end);
  } else if (cfg.custom) {
    cfg.test_start = cfg.train_start;
    cfg.test_end = cfg.train_end;
  }
  if (j.contains("test_points")) cfg.test_points = as_count(j.at("test_points"), "test_points");
  if (j.contains("paper_literal_base")) {
    const json& b = j.at("paper_literal_base");
    if (!b.is_boolean()) fail("paper_literal_base", "expected a boolean");
    cfg.paper_literal_base = b.get<bool>();
  }
  if (j.contains("output_dir")) {
    const json& o = j.at("output_dir");
    if (!o.is_string()) fail("output_dir", "expected a string");
    cfg.output_dir = o.get<std::string>();
  }

  const char* known[] = {"system",        "train_interval", "n_points",
                         "hidden_units",  "optimizer",      "seed",
                         "restarts",      "test_interval",  "test_points",
                         "paper_literal_base", "output_dir"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail(key, "unknown field");
  }

  check_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    fail("config", ex.what());  // nlohmann messages carry line/column
  }
  return config_from_json(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.custom) {
    const CustomSystemSpec& s = *cfg.custom;
    json sys;
    sys["dim"] = s.dim;
    sys["rhs"] = s.rhs;
    sys["params"] = s.params;
    sys["y0"] = std::vector<double>(s.y0.data(), s.y0.data() + s.y0.size());
    if (s.linear_A.size() > 0) {
      std::vector<std::vector<double>> rows(s.dim, std::vector<double>(s.dim));
      for (int i = 0; i < s.dim; ++i) {
        for (int k = 0; k < s.dim; ++k) rows[i][k] = s.linear_A(i, k);
      }
      sys["linear_A"] = rows;
    }
    if (s.linear_c.size() > 0) {
      sys["linear_c"] = std::vector<double>(s.linear_c.data(), s.linear_c.data() + s.dim);
    }
    j["system"] = sys;
  } else {
    j["system"] = cfg.preset;
  }
  j["train_interval"] = {cfg.train_start, cfg.train_end};
  j["n_points"] = cfg.n_points;
  j["hidden_units"] = cfg.hidden_units;
  j["optimizer"] = {{"method", cfg.optimizer.method},
                    {"max_iters", cfg.optimizer.max_iters},
                    {"grad_tol", cfg.optimizer.grad_tol},
                    {"loss_tol", cfg.optimizer.loss_tol},
                    {"wolfe_c1", cfg.optimizer.wolfe_c1},
                    {"wolfe_c2", cfg.optimizer.wolfe_c2}};
  j["seed"] = cfg.seed;
  j["restarts"] = cfg.restarts;
  j["test_interval"] = {cfg.test_start, cfg.test_end};
  j["test_points"] = cfg.test_points;
  j["paper_literal_base"] = cfg.paper_literal_base;
  j["output_dir"] = cfg.output_dir;
  return j;
}

Experiment materialize(const ExperimentConfig& cfg) {
  check_config(cfg);
  Experiment exp;
  if (!cfg.preset.empty()) {
    SystemPreset preset;
    try {
      preset = builtin(cfg.preset);
    } catch (const std::invalid_argument& ex) {
      fail("system", ex.what());
    }
    exp.system = preset.system;
    exp.linear = preset.linear_part;
    exp.reported_loss = preset.reported_loss;
    exp.reported_rmse = preset.reported_rmse;
    if (cfg.paper_literal_base) {
      exp.base = reported_base(cfg.preset);
      exp.literal_base = true;
    }
  } else {
    const CustomSystemSpec& s = *cfg.custom;
    try {
      exp.system = from_expressions(s.dim, s.rhs, s.params, s.y0, cfg.train_end);
    } catch (const std::exception& ex) {
      fail("system.rhs", ex.what());
    }
    Eigen::MatrixXd a = s.linear_A;
    if (a.size() == 0) a = Eigen::MatrixXd::Zero(s.dim, s.dim);
    Eigen::VectorXd c = s.linear_c;
    if (c.size() == 0) c = Eigen::VectorXd::Zero(s.dim);
    exp.linear = AffineField(a, c);
  }
  exp.system.time_horizon = std::max(cfg.train_end, cfg.test_end);
  if (!exp.literal_base) {
    const AffineField field = exp.linear;
    const Eigen::VectorXd y0 = exp.system.y0;
    exp.base = [field, y0](double t) { return flow(field, y0, t); };
  }
  return exp;
}

}  // namespace lieode
