#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "seisint/lds.hpp"

namespace seisint {

/// Strategy constants of CMA-ES for a given dimension and population size.
struct EsParams {
  std::size_t dim = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  Eigen::VectorXd weights;  // mu positive weights, sum 1
  double mueff = 0.0;
  double cc = 0.0;
  double cs = 0.0;
  double c1 = 0.0;
  double cmu = 0.0;
  double damps = 0.0;
  double chi_n = 0.0;

  /// lambda = 4 + floor(3 ln D) when lambda == 0; mu = lambda / 2 with
  /// log-rank weights.
  static EsParams defaults(std::size_t dim, std::size_t lambda = 0);
};

/// Search state advanced by ask/tell.
struct EsState {
  EsParams params;
  Eigen::VectorXd mean;
  double sigma = 1.0;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd basis;  // B
  Eigen::VectorXd scales;  // d, square roots of the eigenvalues of C
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  std::size_t generation = 0;
  std::size_t eigen_generation = 0;

  EsState(Eigen::VectorXd mean, double sigma, std::size_t lambda = 0);

  [[nodiscard]] std::size_t dim() const { return params.dim; }
  [[nodiscard]] std::size_t lambda() const { return params.lambda; }
  /// Recomputes B and d from C.
  void refresh_eigen();
  /// Throws NumericalError when an invariant is broken.
  void validate() const;
};

enum class EsVariant { Random, Des };

/// Supplier of the lambda uniform columns used by one generation.
///
/// Random draws i.i.d. uniforms. Des returns the base D x lambda set in the
/// first generation and a fresh DRR row permutation of it in every later one.
class SequenceSource {
 public:
  static SequenceSource random(std::uint64_t seed);
  static SequenceSource des(PointSet base, std::uint64_t seed);

  [[nodiscard]] EsVariant variant() const { return variant_; }
  [[nodiscard]] const PointSet& base() const { return base_; }

  /// D x lambda matrix of variates in [0, 1].
  Eigen::MatrixXd next(std::size_t dim, std::size_t lambda);
  /// One i.i.d. uniform vector, used to resample rejected candidates.
  Eigen::VectorXd uniform(std::size_t dim);

 private:
  SequenceSource(EsVariant variant, PointSet base, std::uint64_t seed);
  EsVariant variant_;
  PointSet base_;
  std::mt19937_64 rng_;
  std::size_t generation_ = 0;
};

/// Maps uniform variates to candidates m + sigma B (d o Phi^{-1}(eps)).
Eigen::VectorXd candidate_from_uniform(const EsState& state, const Eigen::VectorXd& eps);

/// D x lambda candidate matrix for the next generation.
Eigen::MatrixXd ask(const EsState& state, SequenceSource& source);

/// Rank-based update from evaluated candidates (columns). NaN ranks last;
/// ties keep input order.
void tell(EsState& state, const Eigen::MatrixXd& candidates, const std::vector<double>& fitness);

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  [[nodiscard]] bool contains(const Eigen::VectorXd& x) const;
};

struct MinimizeConfig {
  EsVariant variant = EsVariant::Random;
  std::size_t lambda = 0;
  std::size_t max_iters = 1000;
  /// Stop as soon as the best value is at or below this.
  std::optional<double> target;
  std::uint64_t seed = 1;
  /// Initial mean; the box center when unset.
  std::optional<Eigen::VectorXd> x0;
  /// Initial step size as a fraction of the mean box width.
  double sigma_fraction = 0.3;
  std::size_t resample_limit = 10;
  /// Configuration of the DES base set for the Des variant.
  DesConfig des;
};

struct MinimizeResult {
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  bool converged = false;  // target reached
  std::size_t generations = 0;
  std::size_t evaluations = 0;
  std::vector<double> history;  // best-so-far after each generation
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Box-constrained minimization. Out-of-box candidates are redrawn from a
/// fresh uniform vector up to resample_limit times, then clipped.
MinimizeResult minimize(const Objective& objective, const Box& box, const MinimizeConfig& config);

}  // namespace seisint
