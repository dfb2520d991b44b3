#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(LIEODE_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return (raw >> 8) & 0xff;
}

fs::path fresh_dir(const std::string& stem) {
  const fs::path dir = fs::temp_directory_path() / ("lieode_cli_" + stem);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* tiny_config = R"({
  "system": "rossler",
  "n_points": 10,
  "hidden_units": 5,
  "restarts": 1,
  "seed": 3,
  "optimizer": {"max_iters": 25}
})";

}  // namespace

TEST_CASE("train subcommand succeeds on a small config") {
  const auto dir = fresh_dir("train");
  write_file(dir / "cfg.json", tiny_config);
  const int code =
      run_cli("train --config " + (dir / "cfg.json").string() + " --out " + dir.string());
  CHECK(code == 0);
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "extrapolation.csv"));
  CHECK(fs::exists(dir / "loss_history.csv"));

  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report.at("config").at("seed") == 3);
  CHECK(report.at("config").at("output_dir") == dir.string());
}

TEST_CASE("config errors exit with code 1") {
  const auto dir = fresh_dir("errors");
  write_file(dir / "broken.json", "{ not json");
  CHECK(run_cli("train --config " + (dir / "broken.json").string()) == 1);

  write_file(dir / "interval.json",
             R"({"system": "rossler", "train_interval": [2.0, 1.0]})");
  CHECK(run_cli("reference --config " + (dir / "interval.json").string()) == 1);

  CHECK(run_cli("train --preset no_such_system") == 1);
  CHECK(run_cli("train") == 1);  // neither --preset nor --config
  CHECK(run_cli("train --preset rossler --config x.json") == 1);
  CHECK(run_cli("frobnicate") == 1);
}

TEST_CASE("repeat runs give byte-identical reports minus timing") {
  const auto dir = fresh_dir("repeat");
  write_file(dir / "cfg.json", tiny_config);
  const std::string invoke =
      "train --config " + (dir / "cfg.json").string() + " --out " + dir.string();

  auto strip_timing = [](const std::string& text) {
    json j = json::parse(text);
    j.erase("timing");
    return j.dump(2);
  };

  REQUIRE(run_cli(invoke) == 0);
  const std::string first = strip_timing(slurp(dir / "report.json"));
  REQUIRE(run_cli(invoke) == 0);
  CHECK(strip_timing(slurp(dir / "report.json")) == first);
}

TEST_CASE("seed flag changes the run, restarts flag widens the search") {
  const auto dir = fresh_dir("seeds");
  write_file(dir / "cfg.json", tiny_config);
  const std::string base =
      "train --config " + (dir / "cfg.json").string() + " --out " + dir.string();

  REQUIRE(run_cli(base) == 0);
  const double loss_seed3 =
      json::parse(slurp(dir / "report.json")).at("final_loss").get<double>();
  REQUIRE(run_cli(base + " --seed 4") == 0);
  const json with_seed = json::parse(slurp(dir / "report.json"));
  CHECK(with_seed.at("config").at("seed") == 4);
  CHECK(with_seed.at("final_loss").get<double>() != loss_seed3);

  REQUIRE(run_cli(base + " --restarts 2") == 0);
  CHECK(json::parse(slurp(dir / "report.json")).at("config").at("restarts") == 2);
}

TEST_CASE("reference subcommand writes the rk45 trajectory") {
  const auto dir = fresh_dir("reference");
  const int code = run_cli("reference --preset lorenz --out " + dir.string());
  CHECK(code == 0);
  std::ifstream in(dir / "reference.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,y_1,y_2,y_3");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  // 40-point train grid plus 200-point test grid, deduplicated
  CHECK(rows > 200);
  CHECK(rows <= 240);
}

TEST_CASE("compare subcommand emits per-method histories") {
  const auto dir = fresh_dir("compare");
  write_file(dir / "cfg.json", tiny_config);
  const int code = run_cli("compare --config " + (dir / "cfg.json").string() + " --out " +
                           dir.string() + " --methods bfgs gd");
  CHECK(code == 0);
  CHECK(fs::exists(dir / "loss_history_bfgs.csv"));
  CHECK(fs::exists(dir / "loss_history_gd.csv"));
  CHECK(fs::exists(dir / "compare.json"));
}
