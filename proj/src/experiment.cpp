#include "seisint/experiment.hpp"

#include <fstream>

#include "seisint/error.hpp"
#include "seisint/interval_process.hpp"
#include "seisint/io.hpp"

namespace seisint {

namespace {

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

nlohmann::json psd_json(const PsdParams& p) {
  return {{"omega_g", p.omega_g}, {"zeta_g", p.zeta_g}, {"s0", p.s0}, {"omega_f", p.omega_f}, {"zeta_f", p.zeta_f}};
}

}  // namespace

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Stationary: return "stationary";
    case ExperimentKind::Nonstationary: return "nonstationary";
    default: return "benchmark";
  }
}

ExperimentKind parse_kind(const std::string& name) {
  if (name == "stationary") return ExperimentKind::Stationary;
  if (name == "nonstationary") return ExperimentKind::Nonstationary;
  if (name == "benchmark") return ExperimentKind::Benchmark;
  throw DomainError("unknown experiment '" + name + "'");
}

ExperimentConfig ExperimentConfig::profile(const std::string& name, ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  if (name == "ci") return c;
  if (name == "paper") {
    c.frame = {{"stories", 10}};
    c.methods = {{"mcs", 1000000, 60}, {"des-es-ss", 0, 60}};
    c.benchmark.dims = {10, 30, 50};
    c.benchmark.tolerances = {0.05, 0.01, 0.2, 0.1};
    return c;
  }
  throw DomainError("unknown profile '" + name + "' (expected ci or paper)");
}

void ExperimentConfig::validate() const {
  if (!(duration > 0.0) || !(step > 0.0)) throw DomainError("duration and step must be positive");
  if (samples < 2) throw DomainError("at least two training samples are required");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) throw DomainError("energy fraction must lie in (0, 1]");
  psd.validate();
  if (kind == ExperimentKind::Nonstationary) modulation.validate();
  if (frame_file && !std::filesystem::exists(*frame_file)) {
    throw DomainError("frame file " + frame_file->string() + " does not exist");
  }
  if (kind != ExperimentKind::Benchmark && methods.empty()) throw DomainError("no envelope method configured");
  for (const auto& m : methods) {
    if (m.name != "mcs" && m.name != "cmaes" && m.name != "des-es-ss") {
      throw DomainError("unknown method '" + m.name + "'");
    }
    if (m.name == "mcs" && m.samples < 1) throw DomainError("MCS sample count must be positive");
    if (m.name != "mcs" && m.max_generations < 1) throw DomainError("generation budget must be positive");
  }
  if (kind == ExperimentKind::Benchmark) {
    if (benchmark.seeds < 1 || benchmark.max_iters < 1) throw DomainError("benchmark budgets must be positive");
    if (benchmark.dims.empty() || benchmark.tolerances.empty()) throw DomainError("benchmark needs dims and tolerances");
    for (int id : benchmark.functions) {
      if (id < 1 || id > kBenchmarkCount) throw DomainError("benchmark function ids must be in 1..10");
    }
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = kind_name(c.kind);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  j["duration"] = c.duration;
  j["step"] = c.step;
  j["spectrum"] = psd_json(c.psd);
  j["modulation"] = {{"a", c.modulation.a}, {"b", c.modulation.b}, {"c", c.modulation.c}};
  j["samples"] = c.samples;
  j["frequency_count"] = c.frequency_count;
  j["energy_fraction"] = c.energy_fraction;
  j["frame"] = c.frame;
  if (c.frame_file) j["frame_file"] = c.frame_file->string();
  if (c.floor) j["floor"] = *c.floor;
  nlohmann::json q = nlohmann::json::array();
  for (Quantity x : c.quantities) q.push_back(quantity_name(x));
  j["quantities"] = q;
  nlohmann::json m = nlohmann::json::array();
  for (const auto& s : c.methods) {
    m.push_back({{"name", s.name}, {"samples", s.samples}, {"max_generations", s.max_generations}});
  }
  j["methods"] = m;
  j["benchmark"] = {{"dims", c.benchmark.dims},
                    {"tolerances", c.benchmark.tolerances},
                    {"functions", c.benchmark.functions},
                    {"seeds", c.benchmark.seeds},
                    {"max_iters", c.benchmark.max_iters},
                    {"standard_bias", c.benchmark.standard_bias}};
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.kind = parse_kind(j.value("experiment", std::string("stationary")));
  c.seed = j.value("seed", c.seed);
  c.output_dir = j.value("output_dir", c.output_dir.string());
  c.duration = j.value("duration", c.duration);
  c.step = j.value("step", c.step);
  if (j.contains("spectrum")) {
    const auto& s = j["spectrum"];
    c.psd.omega_g = s.value("omega_g", c.psd.omega_g);
    c.psd.zeta_g = s.value("zeta_g", c.psd.zeta_g);
    c.psd.s0 = s.value("s0", c.psd.s0);
    // The filter follows the site unless given explicitly.
    c.psd.omega_f = s.value("omega_f", 0.1 * c.psd.omega_g);
    c.psd.zeta_f = s.value("zeta_f", c.psd.zeta_g);
  }
  if (j.contains("modulation")) {
    const auto& m = j["modulation"];
    c.modulation.a = m.value("a", c.modulation.a);
    c.modulation.b = m.value("b", c.modulation.a + 0.02);
    c.modulation.c = m.value("c", c.modulation.c);
  }
  c.samples = j.value("samples", c.samples);
  c.frequency_count = j.value("frequency_count", c.frequency_count);
  c.energy_fraction = j.value("energy_fraction", c.energy_fraction);
  if (j.contains("frame")) c.frame = j["frame"];
  if (j.contains("frame_file")) c.frame_file = j["frame_file"].get<std::string>();
  if (j.contains("floor")) c.floor = j["floor"].get<std::size_t>();
  if (j.contains("quantities")) {
    c.quantities.clear();
    for (const auto& q : j["quantities"]) c.quantities.push_back(parse_quantity(q.get<std::string>()));
  }
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j["methods"]) {
      MethodSpec s;
      s.name = m.at("name").get<std::string>();
      s.samples = m.value("samples", s.samples);
      s.max_generations = m.value("max_generations", s.max_generations);
      c.methods.push_back(s);
    }
  }
  if (j.contains("benchmark")) {
    const auto& b = j["benchmark"];
    c.benchmark.dims = b.value("dims", c.benchmark.dims);
    c.benchmark.tolerances = b.value("tolerances", c.benchmark.tolerances);
    c.benchmark.functions = b.value("functions", c.benchmark.functions);
    c.benchmark.seeds = b.value("seeds", c.benchmark.seeds);
    c.benchmark.max_iters = b.value("max_iters", c.benchmark.max_iters);
    c.benchmark.standard_bias = b.value("standard_bias", c.benchmark.standard_bias);
  }
  c.validate();
  return c;
}

namespace {

ExperimentSummary run_benchmark(const ExperimentConfig& c, nlohmann::json& manifest) {
  ExperimentSummary summary;
  std::vector<TableColumn> columns;
  // Dimensions and tolerances pair up when the lists match in length,
  // otherwise every combination is run.
  if (c.benchmark.dims.size() == c.benchmark.tolerances.size()) {
    for (std::size_t i = 0; i < c.benchmark.dims.size(); ++i) columns.push_back({c.benchmark.dims[i], c.benchmark.tolerances[i]});
  } else {
    for (std::size_t d : c.benchmark.dims)
      for (double t : c.benchmark.tolerances) columns.push_back({d, t});
  }
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < c.benchmark.seeds; ++s) seeds.push_back(c.seed + s);
  manifest["benchmark_seeds"] = seeds;

  std::vector<TableRow> rows;
  stage("benchmark", [&] {
    for (int id : c.benchmark.functions) {
      TableRow row;
      row.function_id = id;
      for (const auto& col : columns) {
        TrialConfig tc;
        tc.dim = col.dim;
        tc.tolerance = col.tolerance;
        tc.max_iters = c.benchmark.max_iters;
        tc.seeds = seeds;
        tc.standard_bias = c.benchmark.standard_bias;
        row.medians.emplace_back(convergence_trial(EsVariant::Random, id, tc).median(),
                                 convergence_trial(EsVariant::Des, id, tc).median());
      }
      rows.push_back(std::move(row));
    }
    return 0;
  });
  const auto path = c.output_dir / "table.csv";
  stage("report", [&] {
    std::filesystem::create_directories(c.output_dir);
    std::ofstream os(path);
    os << table_report(columns, rows);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return 0;
  });
  summary.outputs.push_back(path);
  return summary;
}

ExperimentSummary run_frame_experiment(const ExperimentConfig& c, nlohmann::json& manifest) {
  ExperimentSummary summary;
  const std::uint64_t synth_seed = c.seed;
  const std::uint64_t mcs_seed = c.seed + 1;
  const std::uint64_t opt_seed = c.seed + 2;
  manifest["seeds"] = {{"synthesis", synth_seed}, {"mcs", mcs_seed}, {"optimizer", opt_seed}};

  const TimeGrid grid = TimeGrid::covering(c.duration, c.step);
  const auto motions = stage("synthesize", [&] {
    SynthesisOptions so;
    so.psd = c.psd;
    so.frequency_count = c.frequency_count;
    if (c.kind == ExperimentKind::Nonstationary) so.modulation = c.modulation;
    auto m = synthesize_ensemble(so, grid, c.samples, synth_seed);
    const auto path = c.output_dir / "samples.csv";
    write_csv(path, motions_table(m));
    summary.outputs.push_back(path);
    return m;
  });

  const auto basis = stage("fit", [&] {
    const SampleEnsemble ens = SampleEnsemble::from_motions(motions);
    auto process = std::make_shared<const IntervalProcess>(
        c.kind == ExperimentKind::Stationary ? construct_mrsip(ens) : construct_mrip(ens));
    auto b = std::make_shared<const KlBasis>(kl_decompose(*process, c.energy_fraction));
    const auto path = c.output_dir / "process.json";
    write_json(path, to_json(*process, b.get()));
    summary.outputs.push_back(path);
    manifest["kl_order"] = b->order();
    return b;
  });

  const ShearFrame frame = stage("frame", [&] {
    return frame_from_json(c.frame_file ? read_json(*c.frame_file) : c.frame);
  });
  const std::size_t floor = c.floor.value_or(frame.stories() - 1);
  if (floor >= frame.stories()) throw StageError("frame", "floor index out of range");
  std::vector<ResponseSelector> selectors;
  for (Quantity q : c.quantities) selectors.push_back({q, floor});
  const FrameResponse model(frame, basis, selectors);

  std::vector<Eigen::MatrixXd> training(selectors.size(),
                                        Eigen::MatrixXd(static_cast<Eigen::Index>(grid.count),
                                                        static_cast<Eigen::Index>(motions.size())));
  stage("training", [&] {
    for (std::size_t k = 0; k < motions.size(); ++k) {
      const Eigen::MatrixXd r = model.respond(motions[k]);
      for (std::size_t ch = 0; ch < selectors.size(); ++ch) {
        training[ch].col(static_cast<Eigen::Index>(k)) = r.col(static_cast<Eigen::Index>(ch));
      }
    }
    for (std::size_t ch = 0; ch < selectors.size(); ++ch) {
      Table t;
      t.header.push_back("time");
      for (std::size_t k = 0; k < motions.size(); ++k) t.header.push_back("sample_" + std::to_string(k + 1));
      t.values.resize(training[ch].rows(), training[ch].cols() + 1);
      for (Eigen::Index i = 0; i < t.values.rows(); ++i) t.values(i, 0) = grid.at(static_cast<std::size_t>(i));
      t.values.rightCols(training[ch].cols()) = training[ch];
      const auto path = c.output_dir / ("training_" + quantity_name(selectors[ch].quantity) + ".csv");
      write_csv(path, t);
      summary.outputs.push_back(path);
    }
    return 0;
  });

  nlohmann::json report = nlohmann::json::array();
  for (const auto& m : c.methods) {
    stage("envelope:" + m.name, [&] {
      std::vector<EnvelopeResult> results;
      if (m.name == "mcs") {
        ResponseCache cache(model, 0);
        results = mcs_envelope(cache, m.samples, mcs_seed);
      } else {
        ResponseCache cache(model);
        ExtremumConfig ec;
        ec.max_generations = m.max_generations;
        ec.seed = opt_seed;
        for (std::size_t ch = 0; ch < selectors.size(); ++ch) {
          const std::size_t before = cache.simulations();
          results.push_back(m.name == "cmaes" ? cmaes_envelope(cache, ch, ec) : des_es_ss(cache, ch, ec));
          results.back().simulations = cache.simulations() - before;
        }
      }
      for (std::size_t ch = 0; ch < selectors.size(); ++ch) {
        const auto path = c.output_dir / ("envelope_" + m.name + "_" + quantity_name(selectors[ch].quantity) + ".csv");
        write_csv(path, envelope_table(results[ch]));
        summary.outputs.push_back(path);
        const ContainmentReport rep = envelope_contains(results[ch], training[ch]);
        summary.containment.push_back({m.name, selectors[ch].quantity, rep.violations, results[ch].simulations});
        if (m.name == "des-es-ss" && !rep.all()) summary.contained = false;
        report.push_back({{"method", m.name},
                          {"quantity", quantity_name(selectors[ch].quantity)},
                          {"instants", grid.count},
                          {"violations", rep.violations},
                          {"worst_excess", rep.worst_excess},
                          {"simulations", results[ch].simulations},
                          {"unconverged_instants", results[ch].unconverged}});
      }
      return 0;
    });
  }
  const auto path = c.output_dir / "containment.json";
  write_json(path, report);
  summary.outputs.push_back(path);
  manifest["containment"] = report;
  return summary;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& config) {
  stage("config", [&] {
    config.validate();
    std::filesystem::create_directories(config.output_dir);
    return 0;
  });
  nlohmann::json manifest;
  manifest["config"] = to_json(config);
  const auto manifest_path = config.output_dir / "manifest.json";
  try {
    ExperimentSummary s = config.kind == ExperimentKind::Benchmark ? run_benchmark(config, manifest)
                                                                   : run_frame_experiment(config, manifest);
    manifest["status"] = s.contained ? "ok" : "containment-failure";
    write_json(manifest_path, manifest);
    s.outputs.push_back(manifest_path);
    return s;
  } catch (const StageError& e) {
    manifest["status"] = "failed";
    manifest["failed_stage"] = e.stage();
    manifest["error"] = e.what();
    write_json(manifest_path, manifest);
    throw;
  }
}

}  // namespace seisint
