#include "seisint/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "seisint/error.hpp"

namespace seisint {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Table& table) {
  if (!table.header.empty() && table.values.size() > 0 &&
      static_cast<Eigen::Index>(table.header.size()) != table.values.cols()) {
    throw DomainError("CSV header does not match the column count");
  }
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t c = 0; c < table.header.size(); ++c) os << (c ? "," : "") << table.header[c];
  os << '\n';
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) os << (c ? "," : "") << table.values(r, c);
    os << '\n';
  }
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw DomainError(path.string() + " is empty");
  t.header = split(line);
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DomainError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw DomainError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

Table motions_table(const std::vector<GroundMotion>& motions) {
  if (motions.empty()) throw DomainError("no motions to tabulate");
  const TimeGrid& grid = motions.front().grid;
  Table t;
  t.header.push_back("time");
  t.values.resize(static_cast<Eigen::Index>(grid.count), static_cast<Eigen::Index>(motions.size() + 1));
  for (std::size_t i = 0; i < grid.count; ++i) t.values(static_cast<Eigen::Index>(i), 0) = grid.at(i);
  for (std::size_t k = 0; k < motions.size(); ++k) {
    if (!(motions[k].grid == grid)) throw DomainError("motions must share one grid");
    t.header.push_back("sample_" + std::to_string(k + 1));
    for (std::size_t i = 0; i < grid.count; ++i) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = motions[k].values[i];
    }
  }
  return t;
}

SampleEnsemble ensemble_from_table(const Table& table) {
  if (table.values.cols() < 3 || table.values.rows() < 2) {
    throw DomainError("sample CSV needs a time column, two samples and two rows");
  }
  const Eigen::VectorXd time = table.values.col(0);
  const double step = time(1) - time(0);
  for (Eigen::Index i = 1; i < time.size(); ++i) {
    if (std::abs(time(i) - time(0) - step * static_cast<double>(i)) > 1e-9 * std::max(1.0, std::abs(time(i)))) {
      throw DomainError("sample CSV times must be uniformly spaced");
    }
  }
  SampleEnsemble e;
  e.grid = TimeGrid{time(0), step, static_cast<std::size_t>(time.size())};
  e.samples = table.values.rightCols(table.values.cols() - 1);
  e.validate();
  return e;
}

Table points_table(const PointSet& points) {
  Table t;
  for (std::size_t d = 0; d < points.dims(); ++d) t.header.push_back("x" + std::to_string(d + 1));
  t.values = points.points().transpose();
  return t;
}

PointSet points_from_table(const Table& table) { return PointSet(table.values.transpose()); }

Table envelope_table(const EnvelopeResult& envelope) {
  Table t;
  t.header = {"time", "lower", "upper"};
  const auto n = envelope.lower.size();
  t.values.resize(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.values(i, 0) = envelope.grid.at(static_cast<std::size_t>(i));
    t.values(i, 1) = envelope.lower(i);
    t.values(i, 2) = envelope.upper(i);
  }
  return t;
}

nlohmann::json to_json(const TimeGrid& grid) {
  return {{"start", grid.start}, {"step", grid.step}, {"count", grid.count}};
}

TimeGrid grid_from_json(const nlohmann::json& j) {
  TimeGrid g{j.value("start", 0.0), j.at("step").get<double>(), j.at("count").get<std::size_t>()};
  g.validate();
  return g;
}

nlohmann::json to_json(const IntervalProcess& process, const KlBasis* basis) {
  nlohmann::json j;
  j["grid"] = to_json(process.grid());
  j["stationary"] = process.stationary();
  j["median"] = to_vector(process.median());
  j["radius"] = to_vector(process.radius());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < process.correlation().rows(); ++r) {
    rows.push_back(to_vector(process.correlation().row(r).transpose()));
  }
  j["correlation"] = rows;
  if (basis != nullptr) {
    nlohmann::json vecs = nlohmann::json::array();
    for (Eigen::Index c = 0; c < basis->eigenvectors().cols(); ++c) vecs.push_back(to_vector(basis->eigenvectors().col(c)));
    j["kl"] = {{"energy_fraction", basis->energy_fraction()},
               {"order", basis->order()},
               {"eigenvalues", to_vector(basis->eigenvalues())},
               {"eigenvectors", vecs}};
  }
  return j;
}

IntervalProcess process_from_json(const nlohmann::json& j) {
  const TimeGrid grid = grid_from_json(j.at("grid"));
  const auto rows = j.at("correlation").get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd rho(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != n) {
      throw DomainError("correlation must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) rho(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
  return IntervalProcess(grid, to_eigen(j.at("median").get<std::vector<double>>()),
                         to_eigen(j.at("radius").get<std::vector<double>>()), rho, j.value("stationary", false));
}

nlohmann::json to_json(const ShearFrame& frame) {
  const BoucWenParams& b = frame.bouc_wen;
  return {{"masses", frame.masses},
          {"stiffness", frame.stiffness},
          {"alpha", frame.alpha},
          {"damping", {{"a0", frame.damping.a0}, {"a1", frame.damping.a1}}},
          {"bouc_wen",
           {{"A", b.a}, {"n", b.n}, {"beta", b.beta}, {"gamma", b.gamma}, {"dv", b.dv}, {"deta", b.deta},
            {"p", b.p}, {"q", b.q}, {"dpsi", b.dpsi}, {"lambda", b.lambda}, {"zeta_s", b.zeta_s}, {"psi", b.psi}}}};
}

ShearFrame frame_from_json(const nlohmann::json& j) {
  ShearFrame f;
  const double zeta = j.contains("damping") ? j["damping"].value("zeta", 0.05) : 0.05;
  if (j.contains("stories")) {
    f = ShearFrame::uniform(j.at("stories").get<std::size_t>(), j.value("mass", 250000.0), j.value("period", 0.0),
                            zeta, j.value("alpha", 0.04));
  } else {
    f.masses = j.at("masses").get<std::vector<double>>();
    f.stiffness = j.at("stiffness").get<std::vector<double>>();
    f.alpha = j.value("alpha", 0.04);
    f.validate();
    const Eigen::VectorXd w = f.natural_frequencies();
    if (w.size() >= 2) {
      f.damping = rayleigh_coefficients(w(0), w(1), zeta);
    } else {
      f.damping = {0.0, 2.0 * zeta / w(0)};
    }
  }
  if (j.contains("damping")) {
    const auto& d = j["damping"];
    if (d.contains("a0") || d.contains("a1")) f.damping = {d.value("a0", 0.0), d.value("a1", 0.0)};
  }
  if (j.contains("bouc_wen")) {
    const auto& b = j["bouc_wen"];
    BoucWenParams& p = f.bouc_wen;
    p.a = b.value("A", p.a);
    p.n = b.value("n", p.n);
    p.beta = b.value("beta", p.beta);
    p.gamma = b.value("gamma", p.gamma);
    p.dv = b.value("dv", p.dv);
    p.deta = b.value("deta", p.deta);
    p.p = b.value("p", p.p);
    p.q = b.value("q", p.q);
    p.dpsi = b.value("dpsi", p.dpsi);
    p.lambda = b.value("lambda", p.lambda);
    p.zeta_s = b.value("zeta_s", p.zeta_s);
    p.psi = b.value("psi", p.psi);
  }
  f.validate();
  return f;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  ensure_parent(path);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

}  // namespace seisint
