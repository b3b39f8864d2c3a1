#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "seisint/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "seisint_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(SEISINT_CLI) + " " + args + " > " + (kDir / "log.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& name) { return (kDir / name).string(); }

}  // namespace

TEST_CASE("command line workflow") {
  fs::remove_all(kDir);
  fs::create_directories(kDir);

  REQUIRE(run("--seed 5 --out " + p("s.csv") + " synthesize --count 6 --frequency-count 256 --duration 4") == 0);
  const auto samples = seisint::read_csv(p("s.csv"));
  CHECK(samples.values.rows() == 81);
  CHECK(samples.values.cols() == 7);

  REQUIRE(run("--out " + p("proc.json") + " fit-mrip --input " + p("s.csv") + " --stationary") == 0);
  CHECK(fs::exists(p("proc.json")));

  REQUIRE(run("--out " + p("des.csv") + " generate-des --dim 2 --count 16") == 0);
  REQUIRE(run("discrepancy --input " + p("des.csv")) == 0);

  // Five MCS samples cannot cover the training responses.
  CHECK(run("--out " + p("env.csv") + " envelope --process " + p("proc.json") + " --method mcs --samples 5 --training " + p("s.csv")) == 2);
  CHECK(fs::exists(p("env_training.csv")));
  CHECK(seisint::read_csv(p("env.csv")).values.rows() == 81);

  CHECK(run("--out " + p("t.csv") + " benchmark --dims 2 --tols 0.05 --seeds 2 --functions 1") == 0);
  CHECK(fs::exists(p("t.csv")));
}

TEST_CASE("command line failures") {
  fs::create_directories(kDir);
  CHECK(run("discrepancy --input " + p("nope.csv")) == 3);
  CHECK(run("fit-mrip") != 0);
  CHECK(run("no-such-command") != 0);
  {
    std::ofstream cfg(p("bad.json"));
    cfg << R"({"kind": "stationary", "output_dir": ")" << p("badrun") << R"(", "frame": {"stories": 0}, "samples": 3,
              "frequency_count": 128, "methods": [{"name": "mcs", "samples": 10}]})";
  }
  CHECK(run("run-experiment --config " + p("bad.json")) == 3);
  CHECK(fs::exists(kDir / "badrun" / "manifest.json"));
}
