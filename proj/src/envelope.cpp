#include "seisint/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr std::size_t kMcsChunk = 4096;

std::uint64_t mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Running per-instant min/max of one channel with the attaining theta.
class RunningEnvelope {
 public:
  RunningEnvelope(std::size_t instants, std::size_t dim, std::size_t channel)
      : channel_(static_cast<Eigen::Index>(channel)),
        lower_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(instants), std::numeric_limits<double>::infinity())),
        upper_(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(instants), -std::numeric_limits<double>::infinity())),
        arg_lower_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(instants))),
        arg_upper_(arg_lower_) {}

  void add(const Eigen::VectorXd& theta, const Eigen::MatrixXd& history) {
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
      const double v = history(i, channel_);
      if (v < lower_(i)) {
        lower_(i) = v;
        arg_lower_.col(i) = theta;
      }
      if (v > upper_(i)) {
        upper_(i) = v;
        arg_upper_.col(i) = theta;
      }
    }
  }

  void store(EnvelopeResult& out) const {
    out.lower = lower_;
    out.upper = upper_;
    out.arg_lower = arg_lower_;
    out.arg_upper = arg_upper_;
  }

 private:
  Eigen::Index channel_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::MatrixXd arg_lower_;
  Eigen::MatrixXd arg_upper_;
};

}  // namespace

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::Displacement: return "disp";
    case Quantity::Velocity: return "vel";
    default: return "acc";
  }
}

Quantity parse_quantity(const std::string& name) {
  if (name == "disp" || name == "displacement") return Quantity::Displacement;
  if (name == "vel" || name == "velocity") return Quantity::Velocity;
  if (name == "acc" || name == "acceleration") return Quantity::Acceleration;
  throw DomainError("unknown response quantity '" + name + "'");
}

Eigen::VectorXd select(const ResponseHistory& history, const ResponseSelector& selector) {
  const auto c = static_cast<Eigen::Index>(selector.floor);
  if (c >= history.displacement.cols()) throw DomainError("floor index out of range");
  switch (selector.quantity) {
    case Quantity::Displacement: return history.displacement.col(c);
    case Quantity::Velocity: return history.velocity.col(c);
    default: return history.acceleration.col(c);
  }
}

FrameResponse::FrameResponse(ShearFrame frame, std::shared_ptr<const KlBasis> basis,
                             std::vector<ResponseSelector> selectors, SolverConfig solver)
    : frame_(std::move(frame)), basis_(std::move(basis)), selectors_(std::move(selectors)), solver_(solver) {
  frame_.validate();
  if (!basis_) throw DomainError("response model needs a K-L basis");
  if (selectors_.empty()) throw DomainError("response model needs at least one channel");
  for (const auto& s : selectors_) {
    if (s.floor >= frame_.stories()) throw DomainError("floor index out of range");
  }
}

Eigen::MatrixXd FrameResponse::respond(const GroundMotion& ground) const {
  const ResponseHistory h = simulate(frame_, ground, solver_);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(h.grid.count), static_cast<Eigen::Index>(selectors_.size()));
  for (std::size_t c = 0; c < selectors_.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = select(h, selectors_[c]);
  return out;
}

Eigen::MatrixXd FrameResponse::evaluate(const Eigen::VectorXd& theta) const {
  return respond(kl_reconstruct(*basis_, theta));
}

ResponseCache::ResponseCache(const ResponseModel& model, std::size_t capacity) : model_(model), capacity_(capacity) {}

std::shared_ptr<const Eigen::MatrixXd> ResponseCache::operator()(const Eigen::VectorXd& theta) {
  ++lookups_;
  if (capacity_ == 0) {
    ++simulations_;
    return std::make_shared<const Eigen::MatrixXd>(model_.evaluate(theta));
  }
  Key key(theta.data(), theta.data() + theta.size());
  auto it = entries_.find(key);
  if (it != entries_.end()) {
    recency_.splice(recency_.begin(), recency_, it->second.second);
    return it->second.first;
  }
  ++simulations_;
  auto value = std::make_shared<const Eigen::MatrixXd>(model_.evaluate(theta));
  recency_.push_front(key);
  entries_.emplace(std::move(key), std::make_pair(value, recency_.begin()));
  if (entries_.size() > capacity_) {
    entries_.erase(recency_.back());
    recency_.pop_back();
  }
  return value;
}

void ResponseCache::reset_counters() {
  simulations_ = 0;
  lookups_ = 0;
}

std::vector<EnvelopeResult> mcs_envelope(ResponseCache& cache, std::size_t count, std::uint64_t seed,
                                         const HistoryObserver& observer) {
  if (count < 1) throw DomainError("MCS needs at least one sample");
  const ResponseModel& model = cache.model();
  const std::size_t dim = model.dimension();
  const std::size_t instants = model.grid().count;
  std::vector<RunningEnvelope> running;
  for (std::size_t c = 0; c < model.channels(); ++c) running.emplace_back(instants, dim, c);

  const std::size_t sims_before = cache.simulations();
  const std::size_t lookups_before = cache.lookups();
  for (std::size_t start = 0, chunk = 0; start < count; start += kMcsChunk, ++chunk) {
    const std::size_t n = std::min(kMcsChunk, count - start);
    const Eigen::MatrixXd thetas = sample_hypersphere(dim, n, mix(seed, chunk));
    for (Eigen::Index j = 0; j < thetas.cols(); ++j) {
      const Eigen::VectorXd theta = thetas.col(j);
      std::shared_ptr<const Eigen::MatrixXd> h;
      try {
        h = cache(theta);
      } catch (const NumericalError& e) {
        std::ostringstream os;
        os << e.what() << " (MCS sample " << start + static_cast<std::size_t>(j) << ")";
        throw NumericalError(os.str());
      }
      if (observer) observer(theta, *h);
      for (auto& r : running) r.add(theta, *h);
    }
  }

  std::vector<EnvelopeResult> out(running.size());
  for (std::size_t c = 0; c < running.size(); ++c) {
    out[c].grid = model.grid();
    running[c].store(out[c]);
    out[c].simulations = cache.simulations() - sims_before;
    out[c].evaluations = cache.lookups() - lookups_before;
    out[c].method = "mcs";
  }
  return out;
}

Extremum instant_extremum(ResponseCache& cache, std::size_t channel, std::size_t instant, Sense sense,
                          const ExtremumConfig& config, const std::optional<Eigen::VectorXd>& warm_start,
                          SequenceSource* source, const HistoryObserver& observer) {
  const ResponseModel& model = cache.model();
  const std::size_t dim = model.dimension();
  if (channel >= model.channels()) throw DomainError("channel index out of range");
  if (instant >= model.grid().count) throw DomainError("instant index out of range");
  if (config.max_generations < 1 || config.stagnation_window < 1) throw DomainError("optimizer budget must be positive");

  Eigen::VectorXd m0 = warm_start.value_or(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
  if (static_cast<std::size_t>(m0.size()) != dim) throw DomainError("warm start dimension mismatch");
  EsState state(std::move(m0), config.sigma0, config.lambda);

  std::optional<SequenceSource> own;
  if (source == nullptr) {
    own = config.variant == EsVariant::Des
              ? SequenceSource::des(generate_des(dim, state.lambda(), config.des, config.seed).points, config.seed + 1)
              : SequenceSource::random(config.seed);
    source = &*own;
  }

  const double sign = sense == Sense::Max ? -1.0 : 1.0;
  const auto row = static_cast<Eigen::Index>(instant);
  const auto col = static_cast<Eigen::Index>(channel);

  Extremum out;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  std::vector<double> fitness(state.lambda());
  for (std::size_t g = 0; g < config.max_generations; ++g) {
    Eigen::MatrixXd x = ask(state, *source);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double norm = x.col(j).norm();
      if (norm > 1.0) x.col(j) /= norm;
      const Eigen::VectorXd theta = x.col(j);
      const auto h = cache(theta);
      if (observer) observer(theta, *h);
      const double f = sign * (*h)(row, col);
      fitness[static_cast<std::size_t>(j)] = f;
      ++out.evaluations;
      if (f < best || out.theta.size() == 0) {
        best = f;
        out.theta = theta;
      }
    }
    out.generations = g + 1;
    trace.push_back(best);
    if (trace.size() > config.stagnation_window) {
      const double before = trace[trace.size() - 1 - config.stagnation_window];
      if (std::abs(before - best) <= config.stagnation_tol * std::abs(best)) {
        out.converged = true;
        break;
      }
    }
    tell(state, x, fitness);
    if (state.sigma < 1e-12) {
      out.converged = true;
      break;
    }
  }
  out.value = sign * best;
  return out;
}

EnvelopeResult optimizer_envelope(ResponseCache& cache, std::size_t channel, const ExtremumConfig& config,
                                  bool sequential) {
  const ResponseModel& model = cache.model();
  const std::size_t dim = model.dimension();
  const std::size_t instants = model.grid().count;
  RunningEnvelope running(instants, dim, channel);
  const HistoryObserver observer = [&](const Eigen::VectorXd& theta, const Eigen::MatrixXd& h) {
    running.add(theta, h);
  };

  const std::size_t lambda = EsParams::defaults(dim, config.lambda).lambda;
  SequenceSource source = config.variant == EsVariant::Des
                              ? SequenceSource::des(generate_des(dim, lambda, config.des, config.seed).points,
                                                    config.seed + 1)
                              : SequenceSource::random(config.seed);

  const std::size_t sims_before = cache.simulations();
  const std::size_t lookups_before = cache.lookups();
  EnvelopeResult out;
  out.grid = model.grid();
  for (Sense sense : {Sense::Min, Sense::Max}) {
    std::optional<Eigen::VectorXd> warm = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < instants; ++i) {
      const Extremum ex = instant_extremum(cache, channel, i, sense, config, sequential ? warm : std::nullopt,
                                           &source, observer);
      if (!ex.converged) ++out.unconverged;
      if (sequential) warm = ex.theta;
    }
  }
  running.store(out);
  out.simulations = cache.simulations() - sims_before;
  out.evaluations = cache.lookups() - lookups_before;
  return out;
}

EnvelopeResult des_es_ss(ResponseCache& cache, std::size_t channel, ExtremumConfig config) {
  config.variant = EsVariant::Des;
  EnvelopeResult out = optimizer_envelope(cache, channel, config, true);
  out.method = "des-es-ss";
  return out;
}

EnvelopeResult cmaes_envelope(ResponseCache& cache, std::size_t channel, ExtremumConfig config) {
  config.variant = EsVariant::Random;
  EnvelopeResult out = optimizer_envelope(cache, channel, config, false);
  out.method = "cmaes";
  return out;
}

ContainmentReport envelope_contains(const EnvelopeResult& envelope, const Eigen::MatrixXd& histories) {
  const Eigen::Index n = envelope.lower.size();
  if (envelope.upper.size() != n) throw DomainError("envelope bounds differ in length");
  if (histories.cols() > 0 && histories.rows() != n) throw DomainError("history grid does not match the envelope");
  const double scale = std::max({envelope.lower.cwiseAbs().maxCoeff(), envelope.upper.cwiseAbs().maxCoeff(), 1e-300});
  const double tol = 1e-9 * scale;
  ContainmentReport report;
  report.contained.assign(static_cast<std::size_t>(n), true);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < histories.cols(); ++k) {
      const double v = histories(i, k);
      const double excess = std::max(envelope.lower(i) - v, v - envelope.upper(i));
      if (excess > tol || std::isnan(v)) {
        if (report.contained[static_cast<std::size_t>(i)]) ++report.violations;
        report.contained[static_cast<std::size_t>(i)] = false;
        if (excess > report.worst_excess) {
          report.worst_excess = excess;
          report.worst_instant = static_cast<std::size_t>(i);
        }
      }
    }
  }
  return report;
}

}  // namespace seisint
