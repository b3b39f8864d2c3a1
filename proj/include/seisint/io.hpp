#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "seisint/envelope.hpp"
#include "seisint/interval_process.hpp"
#include "seisint/lds.hpp"
#include "seisint/shear_frame.hpp"

namespace seisint {

struct Table {
  std::vector<std::string> header;
  Eigen::MatrixXd values;  // one row per record
};

/// Headered numeric CSV, written with round-trip precision.
void write_csv(const std::filesystem::path& path, const Table& table);
Table read_csv(const std::filesystem::path& path);

/// Columns time, sample_1..sample_n.
Table motions_table(const std::vector<GroundMotion>& motions);
SampleEnsemble ensemble_from_table(const Table& table);

/// One row per point, columns x1..xD.
Table points_table(const PointSet& points);
PointSet points_from_table(const Table& table);

/// Columns time, lower, upper.
Table envelope_table(const EnvelopeResult& envelope);

nlohmann::json to_json(const TimeGrid& grid);
TimeGrid grid_from_json(const nlohmann::json& j);

/// Process bundle: grid, median, radius, correlation, stationary flag and,
/// when a basis is given, its eigenpairs and truncation order.
nlohmann::json to_json(const IntervalProcess& process, const KlBasis* basis = nullptr);
IntervalProcess process_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ShearFrame& frame);
/// Accepts either explicit "masses"/"stiffness" lists or a "stories" count
/// (uniform frame); damping as {"a0", "a1"} or {"zeta"}.
ShearFrame frame_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace seisint
