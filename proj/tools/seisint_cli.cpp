#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seisint/benchmark.hpp"
#include "seisint/envelope.hpp"
#include "seisint/error.hpp"
#include "seisint/experiment.hpp"
#include "seisint/interval_process.hpp"
#include "seisint/io.hpp"
#include "seisint/lds.hpp"
#include "seisint/spectra.hpp"

namespace {

using namespace seisint;

constexpr int kContainmentFailure = 2;
constexpr int kStageFailure = 3;

struct Globals {
  std::uint64_t seed = 2024;
  std::string out;
  std::string profile = "ci";
};

std::string require_out(const Globals& g, const std::string& fallback) { return g.out.empty() ? fallback : g.out; }

int run_synthesize(const Globals& g, const std::string& spectrum, bool modulated, const PsdParams& psd,
                   const ModulationParams& mod, double dt, double duration, std::size_t count, std::size_t freqs) {
  SynthesisOptions so;
  so.kind = spectrum == "kanai-tajimi" ? SpectrumKind::KanaiTajimi : SpectrumKind::CloughPenzien;
  so.psd = psd;
  so.frequency_count = freqs;
  if (modulated) so.modulation = mod;
  const auto motions = synthesize_ensemble(so, TimeGrid::covering(duration, dt), count, g.seed);
  const std::string path = require_out(g, "samples.csv");
  write_csv(path, motions_table(motions));
  std::cout << "wrote " << count << " accelerograms to " << path << '\n';
  return 0;
}

int run_fit(const Globals& g, const std::string& input, bool stationary, double energy, bool exact) {
  const SampleEnsemble ens = ensemble_from_table(read_csv(input));
  MripOptions opt;
  opt.exact = exact;
  const IntervalProcess p = stationary ? construct_mrsip(ens, opt) : construct_mrip(ens, opt);
  const KlBasis basis = kl_decompose(p, energy);
  const std::string path = require_out(g, "process.json");
  write_json(path, to_json(p, &basis));
  std::cout << (stationary ? "MRSIP" : "MRIP") << " over " << ens.size() << " samples, K-L order " << basis.order()
            << " of " << p.size() << ", written to " << path << '\n';
  return 0;
}

int run_generate_des(const Globals& g, std::size_t dim, std::size_t count, const DesConfig& cfg) {
  const DesResult r = generate_des(dim, count, cfg, g.seed);
  if (!r.converged) std::cerr << "warning: DES did not reach a static state in " << r.steps << " steps\n";
  const std::string path = require_out(g, "des.csv");
  write_csv(path, points_table(r.points));
  std::cout << "L2 discrepancy " << l2_discrepancy(r.points) << ", written to " << path << '\n';
  return 0;
}

int run_discrepancy(const std::string& input) {
  const PointSet p = points_from_table(read_csv(input));
  std::printf("%.17g\n", l2_discrepancy(p));
  return 0;
}

struct EnvelopeArgs {
  std::string method = "des-es-ss";
  std::string frame;
  std::string process;
  std::string response = "disp";
  std::optional<std::size_t> floor;
  double energy = 0.99;
  std::optional<double> dt;
  std::optional<double> duration;
  std::size_t samples = 10000;
  std::size_t budget = 60;
  std::string training;
};

int run_envelope(const Globals& g, const EnvelopeArgs& a) {
  auto process = std::make_shared<const IntervalProcess>(process_from_json(read_json(a.process)));
  const TimeGrid& grid = process->grid();
  if (a.dt && std::abs(*a.dt - grid.step) > 1e-12) throw DomainError("--dt does not match the process grid");
  if (a.duration && std::abs(*a.duration - grid.end()) > 1e-9) {
    throw DomainError("--duration does not match the process grid");
  }
  auto basis = std::make_shared<const KlBasis>(kl_decompose(*process, a.energy));
  const ExperimentConfig profile = ExperimentConfig::profile(g.profile, ExperimentKind::Stationary);
  const ShearFrame frame = frame_from_json(a.frame.empty() ? profile.frame : read_json(a.frame));
  const std::size_t floor = a.floor.value_or(frame.stories() - 1);
  const FrameResponse model(frame, basis, {{parse_quantity(a.response), floor}});

  EnvelopeResult env;
  if (a.method == "mcs") {
    ResponseCache cache(model, 0);
    env = mcs_envelope(cache, a.samples, g.seed).front();
  } else {
    ResponseCache cache(model);
    ExtremumConfig ec;
    ec.max_generations = a.budget;
    ec.seed = g.seed;
    env = a.method == "cmaes" ? cmaes_envelope(cache, 0, ec) : des_es_ss(cache, 0, ec);
  }
  const std::string path = require_out(g, "envelope.csv");
  write_csv(path, envelope_table(env));
  std::cout << a.method << ": " << env.simulations << " simulations, written to " << path << '\n';

  if (!a.training.empty()) {
    const SampleEnsemble ens = ensemble_from_table(read_csv(a.training));
    if (!(ens.grid == grid)) throw DomainError("training samples are not on the process grid");
    Table t;
    t.header.push_back("time");
    Eigen::MatrixXd responses(static_cast<Eigen::Index>(grid.count), ens.samples.cols());
    for (Eigen::Index k = 0; k < ens.samples.cols(); ++k) {
      GroundMotion gm{grid, std::vector<double>(ens.samples.col(k).data(), ens.samples.col(k).data() + grid.count)};
      responses.col(k) = model.respond(gm).col(0);
      t.header.push_back("sample_" + std::to_string(k + 1));
    }
    t.values.resize(responses.rows(), responses.cols() + 1);
    for (Eigen::Index i = 0; i < responses.rows(); ++i) t.values(i, 0) = grid.at(static_cast<std::size_t>(i));
    t.values.rightCols(responses.cols()) = responses;
    std::filesystem::path companion(path);
    companion.replace_filename(companion.stem().string() + "_training.csv");
    write_csv(companion, t);
    const ContainmentReport rep = envelope_contains(env, responses);
    std::cout << "containment: " << rep.violations << " of " << grid.count << " instants violated\n";
    if (!rep.all()) return kContainmentFailure;
  }
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_benchmark_cmd(const Globals& g, const std::string& dims, const std::string& tols, std::size_t seeds,
                      const std::string& functions, std::size_t max_iters, bool zero_bias) {
  ExperimentConfig c = ExperimentConfig::profile(g.profile, ExperimentKind::Benchmark);
  c.seed = g.seed;
  c.output_dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out).parent_path();
  c.benchmark.dims.clear();
  for (const auto& d : split_list(dims)) c.benchmark.dims.push_back(std::stoul(d));
  c.benchmark.tolerances.clear();
  for (const auto& t : split_list(tols)) c.benchmark.tolerances.push_back(std::stod(t));
  if (!functions.empty()) {
    c.benchmark.functions.clear();
    for (const auto& f : split_list(functions)) c.benchmark.functions.push_back(std::stoi(f));
  }
  c.benchmark.seeds = seeds;
  c.benchmark.max_iters = max_iters;
  c.benchmark.standard_bias = !zero_bias;
  if (c.output_dir.empty()) c.output_dir = ".";
  run_experiment(c);
  const auto table = c.output_dir / "table.csv";
  if (!g.out.empty() && std::filesystem::path(g.out) != table) std::filesystem::rename(table, g.out);
  std::cout << "wrote " << (g.out.empty() ? table.string() : g.out) << '\n';
  return 0;
}

int run_experiment_cmd(const Globals& g, const std::string& config_path, const std::string& experiment,
                       bool seed_given) {
  ExperimentConfig c;
  if (!config_path.empty()) {
    c = config_from_json(read_json(config_path));
    if (seed_given) c.seed = g.seed;
  } else {
    c = ExperimentConfig::profile(g.profile, parse_kind(experiment));
    c.seed = g.seed;
  }
  if (!g.out.empty()) c.output_dir = g.out;
  const ExperimentSummary s = run_experiment(c);
  for (const auto& e : s.containment) {
    std::cout << e.method << " " << quantity_name(e.quantity) << ": " << e.violations << " violated instants, "
              << e.simulations << " simulations\n";
  }
  std::cout << "artifacts in " << c.output_dir.string() << '\n';
  return s.contained ? 0 : kContainmentFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interval seismic response envelopes"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output path");
  app.add_option("--profile", g.profile, "Default scale")->check(CLI::IsMember({"ci", "paper"}));

  std::string spectrum = "clough-penzien";
  bool modulated = false;
  PsdParams psd;
  ModulationParams mod;
  double dt = 0.05;
  double duration = 10.0;
  std::size_t count = 20;
  std::size_t freqs = 2048;
  auto* synth = app.add_subcommand("synthesize", "Artificial accelerograms");
  synth->add_option("--spectrum", spectrum)->check(CLI::IsMember({"kanai-tajimi", "clough-penzien"}));
  synth->add_flag("--modulated", modulated, "Apply the time-frequency modulation");
  synth->add_option("--omega-g", psd.omega_g);
  synth->add_option("--zeta-g", psd.zeta_g);
  synth->add_option("--s0", psd.s0);
  synth->add_option("--a", mod.a);
  auto* b_opt = synth->add_option("--b", mod.b);
  synth->add_option("--c", mod.c);
  synth->add_option("--dt", dt);
  synth->add_option("--duration", duration);
  synth->add_option("--count", count);
  synth->add_option("--frequency-count", freqs);

  std::string input;
  bool stationary = false;
  bool exact = false;
  double energy = 0.99;
  auto* fit = app.add_subcommand("fit-mrip", "Fit an interval process to samples");
  fit->add_option("--input", input)->required();
  fit->add_flag("--stationary", stationary);
  fit->add_flag("--exact", exact, "Iterative minimum-trace solve");
  fit->add_option("--energy", energy);

  std::size_t des_dim = 2;
  std::size_t des_count = 64;
  DesConfig des;
  auto* gen = app.add_subcommand("generate-des", "DES point set");
  gen->add_option("--dim", des_dim)->required();
  gen->add_option("--count", des_count)->required();
  gen->add_option("--p", des.p);
  gen->add_option("--q", des.q);
  gen->add_option("--damping", des.damping);
  gen->add_option("--dt", des.dt);
  gen->add_option("--max-steps", des.max_steps);

  std::string disc_input;
  auto* disc = app.add_subcommand("discrepancy", "Star L2 discrepancy of a point CSV");
  disc->add_option("--input", disc_input)->required();

  EnvelopeArgs ea;
  auto* env = app.add_subcommand("envelope", "Response envelope of a frame");
  env->add_option("--method", ea.method)->check(CLI::IsMember({"mcs", "cmaes", "des-es-ss"}));
  env->add_option("--frame", ea.frame, "Frame JSON (profile frame when omitted)");
  env->add_option("--process", ea.process)->required();
  env->add_option("--response", ea.response)->check(CLI::IsMember({"disp", "vel", "acc"}));
  env->add_option("--floor", ea.floor, "Zero-based floor (top when omitted)");
  env->add_option("--energy", ea.energy);
  env->add_option("--dt", ea.dt);
  env->add_option("--duration", ea.duration);
  env->add_option("--samples", ea.samples, "MCS sample count");
  env->add_option("--budget", ea.budget, "Generations per instant");
  env->add_option("--training", ea.training, "Sample CSV for the containment check");

  std::string dims = "10";
  std::string tols = "0.05";
  std::size_t seeds = 20;
  std::string functions;
  std::size_t max_iters = 1000;
  bool zero_bias = false;
  auto* bench = app.add_subcommand("benchmark", "CMA-ES vs DES-ES convergence table");
  bench->add_option("--dims", dims);
  bench->add_option("--tols", tols);
  bench->add_option("--seeds", seeds);
  bench->add_option("--functions", functions);
  bench->add_option("--max-iters", max_iters);
  bench->add_flag("--zero-bias", zero_bias, "Use f* = 0 instead of the standard biases");

  std::string config_path;
  std::string experiment = "stationary";
  auto* run = app.add_subcommand("run-experiment", "Full pipeline with manifest");
  run->add_option("--config", config_path, "Experiment JSON");
  run->add_option("--experiment", experiment)->check(CLI::IsMember({"stationary", "nonstationary", "benchmark"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      if (b_opt->count() == 0) mod.b = mod.a + 0.02;
      psd = PsdParams::with_site(psd.omega_g, psd.zeta_g, psd.s0);
      return run_synthesize(g, spectrum, modulated, psd, mod, dt, duration, count, freqs);
    }
    if (*fit) return run_fit(g, input, stationary, energy, exact);
    if (*gen) return run_generate_des(g, des_dim, des_count, des);
    if (*disc) return run_discrepancy(disc_input);
    if (*env) return run_envelope(g, ea);
    if (*bench) return run_benchmark_cmd(g, dims, tols, seeds, functions, max_iters, zero_bias);
    if (*run) return run_experiment_cmd(g, config_path, experiment, seed_opt->count() > 0);
  } catch (const StageError& e) {
    std::cerr << "stage failed: " << e.what() << '\n';
    return kStageFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  }
  return 0;
}
