#pragma once

#include <cstddef>
#include <vector>

namespace seisint {

/// Uniformly spaced instants t_i = start + i * step, i = 0..count-1.
struct TimeGrid {
  double start = 0.0;
  double step = 0.0;
  std::size_t count = 0;

  /// Grid covering [0, duration] inclusive: round(duration / step) + 1 points.
  static TimeGrid covering(double duration, double step);

  [[nodiscard]] double at(std::size_t i) const { return start + step * static_cast<double>(i); }
  [[nodiscard]] double end() const { return count == 0 ? start : at(count - 1); }
  [[nodiscard]] bool empty() const { return count == 0; }
  [[nodiscard]] std::vector<double> instants() const;

  /// Throws DomainError unless count > 0, step > 0 and both are finite.
  void validate() const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

}  // namespace seisint
