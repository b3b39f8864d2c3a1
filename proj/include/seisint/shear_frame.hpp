#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "seisint/spectra.hpp"
#include "seisint/time_grid.hpp"

namespace seisint {

/// Baber-Wen hysteresis with degradation and pinching. At
/// dv = deta = p = 0 it reduces to the plain Bouc-Wen law.
struct BoucWenParams {
  double a = 1.0;
  double n = 1.0;
  double beta = 15.0;   // 1/m
  double gamma = 150.0;  // 1/m
  double dv = 0.0;      // 1/m^2
  double deta = 0.0;    // 1/m^2
  double p = 0.0;       // 1/m^2
  double q = 1.0;
  double dpsi = 1.0;    // 1/m^2
  double lambda = 1.0;
  double zeta_s = 0.95;
  double psi = 1.0;  // m

  void validate() const;
};

/// dz/dt for inter-story velocity v, hysteretic displacement z and
/// dissipated energy e:
/// h(z) (A v - nu (beta |v| |z|^{n-1} z + gamma v |z|^n)) / eta.
double bouc_wen_rate(double velocity, double z, const BoucWenParams& params, double energy = 0.0);

struct Rayleigh {
  double a0 = 0.0;
  double a1 = 0.0;
};

/// Two-mode fit: a0 = 2 zeta w1 w2 / (w1 + w2), a1 = 2 zeta / (w1 + w2).
Rayleigh rayleigh_coefficients(double omega1, double omega2, double zeta);

/// Story-shear frame; index 0 is the first story above the ground.
struct ShearFrame {
  std::vector<double> masses;     // kg
  std::vector<double> stiffness;  // N/m
  double alpha = 0.04;
  Rayleigh damping;
  BoucWenParams bouc_wen;

  /// n equal stories of the given mass, with the story stiffness chosen so
  /// that the elastic fundamental period is `period` (0.1 n s when <= 0),
  /// and Rayleigh damping `zeta` on the first two modes.
  static ShearFrame uniform(std::size_t stories, double mass = 250000.0, double period = 0.0,
                            double zeta = 0.05, double alpha = 0.04);

  [[nodiscard]] std::size_t stories() const { return masses.size(); }
  [[nodiscard]] Eigen::MatrixXd mass_matrix() const;
  /// Elastic tridiagonal stiffness matrix.
  [[nodiscard]] Eigen::MatrixXd stiffness_matrix() const;
  [[nodiscard]] Eigen::MatrixXd damping_matrix() const;
  /// Ascending elastic circular frequencies.
  [[nodiscard]] Eigen::VectorXd natural_frequencies() const;
  void validate() const;
};

struct SolverConfig {
  /// RK4 substeps per grid interval.
  std::size_t substeps = 8;
  /// Substeps are raised until h * omega_max <= this.
  double stability_limit = 1.0;
};

/// Histories on the ground-motion grid; row i is instant i, column j floor j.
struct ResponseHistory {
  TimeGrid grid;
  Eigen::MatrixXd displacement;  // m, relative to the ground
  Eigen::MatrixXd velocity;      // m/s, relative
  Eigen::MatrixXd acceleration;  // m/s^2, absolute
  Eigen::MatrixXd hysteretic;    // z, m
};

/// Integrates M x'' + C x' + F(x, z) = -M 1 u_g from rest with fixed-step
/// RK4 and linear interpolation of u_g inside each grid interval.
ResponseHistory simulate(const ShearFrame& frame, const GroundMotion& ground, const SolverConfig& config = {});

}  // namespace seisint
