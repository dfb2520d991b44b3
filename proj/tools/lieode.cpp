#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "lieode/config.hpp"
#include "lieode/run.hpp"

namespace {

struct CommonOpts {
  std::string preset;
  std::string config_path;
  long long seed = -1;
  int restarts = -1;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--preset", opts.preset, "builtin system name");
  cmd->add_option("--config", opts.config_path, "path to a JSON experiment config");
  cmd->add_option("--seed", opts.seed, "base RNG seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--restarts", opts.restarts, "number of seeded starts")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", opts.out, "output directory");
}

lieode::ExperimentConfig resolve(const CommonOpts& opts) {
  if (opts.preset.empty() == opts.config_path.empty()) {
    throw lieode::ConfigError("system", "give exactly one of --preset or --config");
  }
  lieode::ExperimentConfig cfg = opts.preset.empty()
                                     ? lieode::load_config(opts.config_path)
                                     : lieode::config_from_preset(opts.preset);
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.restarts > 0) cfg.restarts = opts.restarts;
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-flow-seeded neural ODE solver"};
  app.require_subcommand(1);

  CommonOpts train_opts, ref_opts, cmp_opts;
  std::vector<std::string> methods = {"bfgs", "gd"};
  std::string bench_out = "out/bench";
  long long bench_seed = 1;

  CLI::App* train = app.add_subcommand("train", "train a network correction and evaluate it");
  add_common(train, train_opts);
  CLI::App* reference = app.add_subcommand("reference", "write the rk45 reference trajectory");
  add_common(reference, ref_opts);
  CLI::App* compare = app.add_subcommand("compare", "train once per optimizer from equal seeds");
  add_common(compare, cmp_opts);
  compare->add_option("--methods", methods, "optimizers to compare (bfgs, gd)");
  CLI::App* bench = app.add_subcommand("bench-all", "run every builtin preset and tabulate");
  bench->add_option("--out", bench_out, "output directory");
  bench->add_option("--seed", bench_seed, "base RNG seed")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) {
      const auto outcome = lieode::cmd_train(resolve(train_opts));
      if (!outcome.error.empty()) {
        std::fprintf(stderr, "train: %s\n", outcome.error.c_str());
      }
      std::printf("report: %s\n", outcome.report_path.c_str());
      return outcome.exit_code;
    }
    if (reference->parsed()) {
      return lieode::cmd_reference(resolve(ref_opts));
    }
    if (compare->parsed()) {
      return lieode::cmd_compare(resolve(cmp_opts), methods);
    }
    return lieode::cmd_bench_all(bench_out, static_cast<std::uint64_t>(bench_seed));
  } catch (const lieode::ConfigError& ex) {
    std::fprintf(stderr, "config error: %s\n", ex.what());
    return 1;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
}
