#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace seisint {

/// D x N matrix of points in the unit cube; column j is point j.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(Eigen::MatrixXd points);

  [[nodiscard]] std::size_t dims() const { return static_cast<std::size_t>(points_.rows()); }
  [[nodiscard]] std::size_t count() const { return static_cast<std::size_t>(points_.cols()); }
  [[nodiscard]] const Eigen::MatrixXd& points() const { return points_; }

  /// Seeded i.i.d. uniform points.
  static PointSet uniform(std::size_t dims, std::size_t count, std::uint64_t seed);

 private:
  Eigen::MatrixXd points_;
};

/// Parameters of the damped repelling-star model.
///
/// Potential V = G (sum_{i<j} d_ij^{-p})^{1/p} with the generalized distance
/// d_ij = ((1/D) sum_k |dx_k|^q)^{1/q}, where dx_k is the minimum-image
/// separation on the unit torus. Small q penalizes coinciding coordinates
/// and spreads the one-dimensional projections.
struct DesConfig {
  double gravity = 1.0;
  double p = 2.0;
  double q = 1.0;
  double damping = 1.0;
  double mass = 1.0;
  double dt = 1e-2;
  std::size_t max_steps = 20000;
  /// Terminal kinetic energy per star.
  double static_tol = 1e-10;
  /// Record total mechanical energy after every step.
  bool record_energy = false;
};

struct DesResult {
  PointSet points;
  bool converged = false;
  std::size_t steps = 0;
  std::vector<double> energy;  // filled when DesConfig::record_energy
};

/// Integrates the star system from seeded uniform positions until it is
/// static (or max_steps). The potential is invariant under per-coordinate
/// torus translations, so the returned set is the static configuration
/// translated, coordinate by coordinate, to the least discrepancy of each
/// one-dimensional projection.
DesResult generate_des(std::size_t dims, std::size_t count, const DesConfig& config,
                       std::uint64_t seed);

/// Total mechanical potential of a configuration (for diagnostics and tests).
double des_potential(const Eigen::MatrixXd& points, const DesConfig& config);

/// Uniformly random permutation of the rows, drawn without replacement.
std::vector<std::size_t> drr_permutation(std::size_t dims, std::mt19937_64& rng);
PointSet apply_row_permutation(const PointSet& set, const std::vector<std::size_t>& perm);
PointSet drr(const PointSet& set, std::uint64_t seed);

/// Squared star L2 discrepancy (Warnock's closed form):
/// 3^{-D} - (2/N) sum_j prod_i (1 - p_ij^2)/2 + (1/N^2) sum_{j,l} prod_i (1 - max(p_ij, p_il)).
double l2_discrepancy_squared(const PointSet& set);
double l2_discrepancy(const PointSet& set);

}  // namespace seisint
