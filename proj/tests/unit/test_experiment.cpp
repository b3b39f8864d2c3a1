#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "seisint/error.hpp"
#include "seisint/experiment.hpp"
#include "seisint/io.hpp"

using namespace seisint;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "seisint_experiment_test" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig quick(ExperimentKind kind, const std::string& name) {
  ExperimentConfig c = ExperimentConfig::profile("ci", kind);
  c.output_dir = fresh_dir(name);
  c.samples = 5;
  c.frequency_count = 256;
  c.methods = {{"mcs", 200, 60}, {"des-es-ss", 0, 1}};
  return c;
}

}  // namespace

TEST_CASE("profiles") {
  const auto ci = ExperimentConfig::profile("ci", ExperimentKind::Stationary);
  CHECK(ci.frame.at("stories") == 3);
  const auto paper = ExperimentConfig::profile("paper", ExperimentKind::Stationary);
  CHECK(paper.frame.at("stories") == 10);
  CHECK(paper.methods.front().samples == 1000000);
  CHECK_THROWS_AS(ExperimentConfig::profile("huge", ExperimentKind::Stationary), DomainError);
  CHECK(parse_kind(kind_name(ExperimentKind::Nonstationary)) == ExperimentKind::Nonstationary);
}

TEST_CASE("config JSON is lossless") {
  ExperimentConfig c = ExperimentConfig::profile("paper", ExperimentKind::Nonstationary);
  c.seed = 77;
  c.floor = 2;
  c.modulation = ModulationParams::with_decay(0.04, 0.02);
  c.quantities = {Quantity::Velocity};
  const nlohmann::json j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);
  CHECK(config_from_json(j).floor == std::size_t{2});
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.samples = 1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ExperimentConfig{};
  c.methods = {{"bogus", 1, 1}};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = ExperimentConfig{};
  c.frame_file = "/nonexistent/frame.json";
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("stationary pipeline is deterministic and writes full grids") {
  ExperimentConfig a = quick(ExperimentKind::Stationary, "det_a");
  a.quantities = {Quantity::Displacement, Quantity::Acceleration};
  ExperimentConfig b = a;
  b.output_dir = fresh_dir("det_b");
  const auto sa = run_experiment(a);
  run_experiment(b);

  for (const char* f : {"samples.csv", "training_disp.csv", "envelope_mcs_disp.csv", "envelope_des-es-ss_acc.csv",
                        "process.json", "containment.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a.output_dir / f));
    CHECK(slurp(a.output_dir / f) == slurp(b.output_dir / f));
  }
  const Table env = read_csv(a.output_dir / "envelope_des-es-ss_disp.csv");
  CHECK(env.values.rows() == 201);
  CHECK(env.values(200, 0) == doctest::Approx(10.0));
  CHECK((env.values.col(1).array() <= env.values.col(2).array()).all());

  const auto manifest = read_json(a.output_dir / "manifest.json");
  CHECK(manifest.at("seeds").at("synthesis") == 2024);
  CHECK(manifest.at("config").at("seed") == 2024);
  CHECK(sa.containment.size() == 4);
}

TEST_CASE("a failing stage keeps earlier outputs and records itself") {
  ExperimentConfig c = quick(ExperimentKind::Nonstationary, "fail");
  c.frame = {{"stories", 0}};
  try {
    run_experiment(c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "frame");
  }
  CHECK(fs::exists(c.output_dir / "samples.csv"));
  CHECK(fs::exists(c.output_dir / "process.json"));
  const auto manifest = read_json(c.output_dir / "manifest.json");
  CHECK(manifest.at("status") == "failed");
  CHECK(manifest.at("failed_stage") == "frame");
}

TEST_CASE("benchmark table from the pipeline") {
  ExperimentConfig c = ExperimentConfig::profile("ci", ExperimentKind::Benchmark);
  c.output_dir = fresh_dir("bench");
  c.benchmark.functions = {1, 5};
  c.benchmark.seeds = 3;
  run_experiment(c);
  const std::string table = slurp(c.output_dir / "table.csv");
  CHECK(table.rfind("function,cmaes_d10_tol0.05,deses_d10_tol0.05\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}
