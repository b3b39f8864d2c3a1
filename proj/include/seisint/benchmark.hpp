#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "seisint/evo.hpp"

namespace seisint {

/// Ten shifted and rotated test functions, numbered 1..10:
/// Bent Cigar, Zakharov, Rosenbrock, Rastrigin, Expanded Schaffer F6,
/// Lunacek bi-Rastrigin, non-continuous Rastrigin, Levy, hybrid
/// (Zakharov, Rosenbrock, Rastrigin) and hybrid (Katsuura, Ackley,
/// Rastrigin, Schaffer F7, modified Schwefel).
constexpr int kBenchmarkCount = 10;

std::string benchmark_name(int id);

/// Conventional optimum values 100, 300, 400, ..., 2000 of the suite.
double standard_bias(int id);

struct BenchmarkFunction {
  int id = 1;
  Eigen::VectorXd shift;
  Eigen::MatrixXd rotation;
  double bias = 0.0;

  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(shift.size()); }
  /// base(R (x - o)) + bias; each base applies its own input scaling.
  [[nodiscard]] double operator()(const Eigen::VectorXd& x) const;
};

/// Seeded shift uniform in [-80, 80]^D and rotation from the QR factor of a
/// Gaussian matrix. `rotate = false` keeps the identity.
BenchmarkFunction make_benchmark(int id, std::size_t dim, std::uint64_t seed, double bias, bool rotate = true);

/// Unshifted, unrotated base function (zero at the origin).
double benchmark_base(int id, const Eigen::VectorXd& z);

struct TrialConfig {
  std::size_t dim = 10;
  double tolerance = 0.05;
  std::size_t max_iters = 1000;
  std::vector<std::uint64_t> seeds;
  /// Optimum value convention; standard_bias(id) when true, zero otherwise.
  bool standard_bias = true;
};

/// e = |f - f*| / max(|f*|, 1).
double relative_error(double f, double optimum);

/// Generation count at which e < tolerance first holds, per seed.
struct TrialResult {
  int function_id = 0;
  EsVariant variant = EsVariant::Random;
  std::vector<std::optional<std::size_t>> iterations;
  /// Median with non-converged runs counted as +inf; empty when the median
  /// itself is non-converged.
  [[nodiscard]] std::optional<double> median() const;
};

TrialResult convergence_trial(EsVariant variant, int function_id, const TrialConfig& config);

struct TableColumn {
  std::size_t dim = 10;
  double tolerance = 0.05;
};

struct TableRow {
  int function_id = 0;
  /// Per column: (random median, des median).
  std::vector<std::pair<std::optional<double>, std::optional<double>>> medians;
};

/// Headered CSV with one row per function and a CMA-ES/DES-ES pair per
/// column; non-converged medians print as "-".
std::string table_report(const std::vector<TableColumn>& columns, const std::vector<TableRow>& rows);

}  // namespace seisint
