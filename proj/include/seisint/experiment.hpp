#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "seisint/benchmark.hpp"
#include "seisint/envelope.hpp"
#include "seisint/shear_frame.hpp"
#include "seisint/spectra.hpp"

namespace seisint {

enum class ExperimentKind { Stationary, Nonstationary, Benchmark };

struct MethodSpec {
  std::string name;  // mcs, cmaes or des-es-ss
  std::size_t samples = 10000;        // mcs
  std::size_t max_generations = 60;   // optimizers
};

struct BenchmarkSpec {
  std::vector<std::size_t> dims{10};
  std::vector<double> tolerances{0.05};
  std::vector<int> functions{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t seeds = 20;
  std::size_t max_iters = 1000;
  bool standard_bias = true;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Stationary;
  std::uint64_t seed = 2024;
  std::filesystem::path output_dir = "out";
  double duration = 10.0;
  double step = 0.05;
  PsdParams psd;
  ModulationParams modulation;
  std::size_t samples = 20;
  std::size_t frequency_count = 2048;
  double energy_fraction = 0.99;
  /// Inline frame description (see frame_from_json) or a path to one.
  nlohmann::json frame = {{"stories", 3}};
  std::optional<std::filesystem::path> frame_file;
  /// Floor index; the top floor when unset.
  std::optional<std::size_t> floor;
  std::vector<Quantity> quantities{Quantity::Displacement, Quantity::Velocity, Quantity::Acceleration};
  std::vector<MethodSpec> methods{{"mcs", 10000, 60}, {"des-es-ss", 10000, 60}};
  BenchmarkSpec benchmark;

  /// Desk-scale defaults: "ci" uses a 3-story frame, "paper" the 10-story
  /// frame with 10^6 MCS samples.
  static ExperimentConfig profile(const std::string& name, ExperimentKind kind);
  void validate() const;
};

std::string kind_name(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Raised with the name of the pipeline stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ContainmentEntry {
  std::string method;
  Quantity quantity = Quantity::Displacement;
  std::size_t violations = 0;
  std::size_t simulations = 0;
};

struct ExperimentSummary {
  std::vector<std::filesystem::path> outputs;
  std::vector<ContainmentEntry> containment;
  /// False when a DES-ES-SS envelope misses a training response.
  bool contained = true;
};

/// synthesize -> fit -> K-L -> envelopes -> containment report, or the
/// benchmark table. Writes manifest.json with every seed and parameter;
/// partial outputs are kept when a stage fails.
ExperimentSummary run_experiment(const ExperimentConfig& config);

}  // namespace seisint
