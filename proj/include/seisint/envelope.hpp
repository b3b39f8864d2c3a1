#pragma once

#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seisint/evo.hpp"
#include "seisint/interval_process.hpp"
#include "seisint/shear_frame.hpp"

namespace seisint {

/// Maps a point theta of the unit ball to response histories; column c of
/// the result is channel c on the model grid.
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;
  [[nodiscard]] virtual std::size_t dimension() const = 0;
  [[nodiscard]] virtual const TimeGrid& grid() const = 0;
  [[nodiscard]] virtual std::size_t channels() const = 0;
  [[nodiscard]] virtual Eigen::MatrixXd evaluate(const Eigen::VectorXd& theta) const = 0;
};

enum class Quantity { Displacement, Velocity, Acceleration };

std::string quantity_name(Quantity q);
Quantity parse_quantity(const std::string& name);

struct ResponseSelector {
  Quantity quantity = Quantity::Displacement;
  std::size_t floor = 0;
};

/// Column of a simulated history picked by a selector.
Eigen::VectorXd select(const ResponseHistory& history, const ResponseSelector& selector);

/// theta -> K-L ground motion -> frame simulation -> selected channels.
class FrameResponse : public ResponseModel {
 public:
  FrameResponse(ShearFrame frame, std::shared_ptr<const KlBasis> basis, std::vector<ResponseSelector> selectors,
                SolverConfig solver = {});

  [[nodiscard]] std::size_t dimension() const override { return basis_->order(); }
  [[nodiscard]] const TimeGrid& grid() const override { return basis_->process().grid(); }
  [[nodiscard]] std::size_t channels() const override { return selectors_.size(); }
  [[nodiscard]] Eigen::MatrixXd evaluate(const Eigen::VectorXd& theta) const override;
  /// Channels for an arbitrary ground motion on the model grid.
  [[nodiscard]] Eigen::MatrixXd respond(const GroundMotion& ground) const;

  [[nodiscard]] const ShearFrame& frame() const { return frame_; }
  [[nodiscard]] const KlBasis& basis() const { return *basis_; }
  [[nodiscard]] const std::vector<ResponseSelector>& selectors() const { return selectors_; }

 private:
  ShearFrame frame_;
  std::shared_ptr<const KlBasis> basis_;
  std::vector<ResponseSelector> selectors_;
  SolverConfig solver_;
};

/// Memoizing front end of a model. Counts simulations (cache misses); a
/// capacity of zero disables caching.
class ResponseCache {
 public:
  explicit ResponseCache(const ResponseModel& model, std::size_t capacity = 200000);

  [[nodiscard]] const ResponseModel& model() const { return model_; }
  std::shared_ptr<const Eigen::MatrixXd> operator()(const Eigen::VectorXd& theta);
  [[nodiscard]] std::size_t simulations() const { return simulations_; }
  [[nodiscard]] std::size_t lookups() const { return lookups_; }
  void reset_counters();

 private:
  using Key = std::vector<double>;
  const ResponseModel& model_;
  std::size_t capacity_;
  std::list<Key> recency_;
  std::map<Key, std::pair<std::shared_ptr<const Eigen::MatrixXd>, std::list<Key>::iterator>> entries_;
  std::size_t simulations_ = 0;
  std::size_t lookups_ = 0;
};

struct EnvelopeResult {
  TimeGrid grid;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  /// Column i is the theta attaining the bound at instant i.
  Eigen::MatrixXd arg_lower;
  Eigen::MatrixXd arg_upper;
  std::size_t simulations = 0;
  std::size_t evaluations = 0;
  /// Instants whose optimizer stopped on the generation cap.
  std::size_t unconverged = 0;
  std::string method;
};

/// Sees every evaluated (theta, history) pair in evaluation order.
using HistoryObserver = std::function<void(const Eigen::VectorXd&, const Eigen::MatrixXd&)>;

/// Per-channel envelopes over `count` hypersphere samples. The sample stream
/// depends only on the seed, so a shorter run is a prefix of a longer one.
std::vector<EnvelopeResult> mcs_envelope(ResponseCache& cache, std::size_t count, std::uint64_t seed,
                                         const HistoryObserver& observer = {});

enum class Sense { Min, Max };

struct ExtremumConfig {
  EsVariant variant = EsVariant::Des;
  double sigma0 = 0.3;
  std::size_t lambda = 0;
  std::size_t max_generations = 60;
  /// Stop when the best value moved less than this (relative) over the
  /// window.
  double stagnation_tol = 1e-6;
  std::size_t stagnation_window = 10;
  std::uint64_t seed = 1;
  DesConfig des;
};

struct Extremum {
  double value = 0.0;
  Eigen::VectorXd theta;
  std::size_t generations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Optimizes y(t_i; theta) over the unit ball. Candidates outside the ball
/// are projected radially. `observer` sees every evaluated history.

Extremum instant_extremum(ResponseCache& cache, std::size_t channel, std::size_t instant, Sense sense,
                          const ExtremumConfig& config, const std::optional<Eigen::VectorXd>& warm_start = {},
                          SequenceSource* source = nullptr, const HistoryObserver& observer = {});

/// Envelope from per-instant optimization. With `sequential`, each instant
/// starts from the previous instant's arg-extremum (theta = 0 at the first);
/// otherwise every instant starts cold at theta = 0. The reported bounds
/// also cover every history evaluated along the way.
EnvelopeResult optimizer_envelope(ResponseCache& cache, std::size_t channel, const ExtremumConfig& config,
                                  bool sequential);

/// DES-driven sequential sweep.
EnvelopeResult des_es_ss(ResponseCache& cache, std::size_t channel, ExtremumConfig config);

/// Independent per-instant CMA-ES with random variates.
EnvelopeResult cmaes_envelope(ResponseCache& cache, std::size_t channel, ExtremumConfig config);

struct ContainmentReport {
  std::vector<bool> contained;  // per instant
  std::size_t violations = 0;
  double worst_excess = 0.0;
  std::size_t worst_instant = 0;
  [[nodiscard]] bool all() const { return violations == 0; }
};

/// Checks every history (instants x histories) against the bounds with
/// tolerance 1e-9 times the envelope scale.
ContainmentReport envelope_contains(const EnvelopeResult& envelope, const Eigen::MatrixXd& histories);

}  // namespace seisint
