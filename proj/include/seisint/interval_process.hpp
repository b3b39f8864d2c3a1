#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "seisint/spectra.hpp"
#include "seisint/time_grid.hpp"

namespace seisint {

/// Measured samples on a shared grid; column k of `samples` is U_k.
struct SampleEnsemble {
  TimeGrid grid;
  Eigen::MatrixXd samples;

  static SampleEnsemble from_motions(const std::vector<GroundMotion>& motions);
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(samples.cols()); }
  void validate() const;
};

/// Convex-model interval process: per-instant median and radius plus the
/// correlation between instants. The covariance is
/// cov(t_i, t_j) = r_i r_j rho(t_i, t_j) and the admissible set is the
/// ellipsoid (U - median)^T C^{-1} (U - median) <= 1.
class IntervalProcess {
 public:
  /// Validates symmetry, unit diagonal, positive radii and, for stationary
  /// processes, the Toeplitz structure and constant median/radius.
  IntervalProcess(TimeGrid grid, Eigen::VectorXd median, Eigen::VectorXd radius,
                  Eigen::MatrixXd correlation, bool stationary);

  [[nodiscard]] const TimeGrid& grid() const { return grid_; }
  [[nodiscard]] const Eigen::VectorXd& median() const { return median_; }
  [[nodiscard]] const Eigen::VectorXd& radius() const { return radius_; }
  [[nodiscard]] const Eigen::MatrixXd& correlation() const { return correlation_; }
  [[nodiscard]] bool stationary() const { return stationary_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(median_.size()); }

  [[nodiscard]] Eigen::MatrixXd covariance() const;
  [[nodiscard]] Eigen::VectorXd lower() const { return median_ - radius_; }
  [[nodiscard]] Eigen::VectorXd upper() const { return median_ + radius_; }

 private:
  TimeGrid grid_;
  Eigen::VectorXd median_;
  Eigen::VectorXd radius_;
  Eigen::MatrixXd correlation_;
  bool stationary_;
};

struct Characteristic {
  Eigen::VectorXd median;
  Eigen::VectorXd radius;
};

/// median = (U + L) / 2, radius = (U - L) / 2.
Characteristic characteristic_params(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// Reusable evaluator of (U - o)^T C^{-1} (U - o) for one process.
///
/// Works in normalized coordinates z = (U - o) / r, so the quadratic form is
/// z^T rho^{-1} z evaluated through the eigen-decomposition of rho. Throws
/// NumericalError naming the smallest eigenvalue when rho is numerically
/// singular.
class MahalanobisForm {
 public:
  explicit MahalanobisForm(const IntervalProcess& process);
  [[nodiscard]] double operator()(const Eigen::VectorXd& sample) const;

 private:
  Eigen::VectorXd median_;
  Eigen::VectorXd inv_radius_;
  Eigen::MatrixXd whitening_;  // Lambda^{-1/2} Phi^T
};

double mahalanobis(const IntervalProcess& process, const Eigen::VectorXd& sample);

struct MripOptions {
  /// Eigenvalues of the scatter matrix are floored at this fraction of
  /// trace / N to keep the ellipsoid non-degenerate.
  double eigen_floor = 1e-8;
  /// Added to the scatter variance (squared) when the ensemble has zero
  /// spread. Zero means such ensembles are rejected.
  double radius_floor = 0.0;
  /// Iterative minimum-trace solve with alternating weight/center updates
  /// instead of the two-stage fit. Non-stationary only; intended for small N.
  bool exact = false;
  std::size_t exact_iterations = 2000;
};

/// Minimum-radius interval process enclosing every sample.
///
/// Two-stage fit: the center is the per-instant midrange of the ensemble, the
/// shape is the (floored) scatter matrix about that center, and the shape is
/// scaled so that the largest sample Mahalanobis value equals one. This is the
/// minimum-trace solution within the family of scaled scatter matrices, not a
/// certified global optimum of the trace problem.
IntervalProcess construct_mrip(const SampleEnsemble& ensemble, const MripOptions& options = {});

/// Stationary variant: constant median (global midrange), Toeplitz
/// correlation from diagonal averaging of the scatter matrix and a constant
/// radius. The diagonal shift that keeps the Toeplitz estimate definite is
/// the one minimizing the binding radius.
IntervalProcess construct_mrsip(const SampleEnsemble& ensemble, const MripOptions& options = {});

/// Discretized interval K-L basis of a process. All N eigenpairs are kept
/// (descending), `order` is the truncation M used for sampling.
class KlBasis {
 public:
  KlBasis(std::shared_ptr<const IntervalProcess> process, double energy_fraction);

  [[nodiscard]] const IntervalProcess& process() const { return *process_; }
  [[nodiscard]] std::shared_ptr<const IntervalProcess> process_ptr() const { return process_; }
  [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }
  [[nodiscard]] std::size_t order() const { return order_; }
  [[nodiscard]] double energy_fraction() const { return energy_fraction_; }

  /// Same eigenpairs with a different truncation order (1..N).
  [[nodiscard]] KlBasis with_order(std::size_t order) const;

  /// U^m + sum_{j<=M} U^r sqrt(lambda_j) phi_j theta_j.
  [[nodiscard]] Eigen::VectorXd reconstruct(const Eigen::VectorXd& theta) const;

  /// Coordinates theta of a path in the truncated basis (least squares).
  [[nodiscard]] Eigen::VectorXd project(const Eigen::VectorXd& path) const;

 private:
  KlBasis() = default;

  std::shared_ptr<const IntervalProcess> process_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  Eigen::MatrixXd scaled_modes_;  // diag(r) * Phi * diag(sqrt(lambda)), all N columns
  std::size_t order_ = 0;
  double energy_fraction_ = 1.0;
};

KlBasis kl_decompose(const IntervalProcess& process, double energy_fraction = 0.99);

GroundMotion kl_reconstruct(const KlBasis& basis, const Eigen::VectorXd& theta);

/// Points uniform in the closed unit M-ball: Gaussian direction, radius
/// u^{1/M}. Column j is the j-th point.
Eigen::MatrixXd sample_hypersphere(std::size_t dim, std::size_t count, std::uint64_t seed);

}  // namespace seisint
