#include "seisint/lds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "seisint/error.hpp"

namespace seisint {

namespace {

struct Field {
  double potential = 0.0;
  Eigen::MatrixXd force;
};

double wrap_separation(double d) { return d - std::round(d); }

Field evaluate(const Eigen::MatrixXd& x, const DesConfig& cfg) {
  const Eigen::Index dims = x.rows();
  const Eigen::Index n = x.cols();
  const double inv_dims = 1.0 / static_cast<double>(dims);
  const bool manhattan = cfg.q == 1.0;
  const bool inverse_square = cfg.p == 2.0;

  // grad holds dS/dx with S = sum_{i<j} d_ij^{-p}.
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(dims, n);
  std::vector<double> sep(static_cast<std::size_t>(dims));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double mean = 0.0;
      for (Eigen::Index k = 0; k < dims; ++k) {
        const double s = wrap_separation(x(k, i) - x(k, j));
        sep[static_cast<std::size_t>(k)] = s;
        mean += manhattan ? std::abs(s) : std::pow(std::abs(s), cfg.q);
      }
      mean *= inv_dims;
      const double d = manhattan ? mean : std::pow(mean, 1.0 / cfg.q);
      const double term = inverse_square ? 1.0 / (d * d) : std::pow(d, -cfg.p);
      sum += term;
      // dd/dx_ik = (1/D) d^{1-q} |s_k|^{q-1} sign(s_k)
      const double outer = -cfg.p * term / d * inv_dims * (manhattan ? 1.0 : std::pow(d, 1.0 - cfg.q));
      for (Eigen::Index k = 0; k < dims; ++k) {
        const double s = sep[static_cast<std::size_t>(k)];
        if (s == 0.0) continue;
        const double mag = manhattan ? 1.0 : std::pow(std::abs(s), cfg.q - 1.0);
        const double g = outer * mag * (s > 0.0 ? 1.0 : -1.0);
        grad(k, i) += g;
        grad(k, j) -= g;
      }
    }
  }

  Field out;
  out.potential = cfg.gravity * std::pow(sum, 1.0 / cfg.p);
  // F = -dV/dx = -G (1/p) S^{1/p - 1} dS/dx
  out.force = (-cfg.gravity / cfg.p * std::pow(sum, 1.0 / cfg.p - 1.0)) * grad;
  return out;
}

void wrap_into_torus(Eigen::MatrixXd& x) {
  x = x.unaryExpr([](double v) {
    double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
  });
}

void check_config(const DesConfig& c) {
  if (!(c.gravity > 0 && c.p > 0 && c.q > 0 && c.damping >= 0 && c.mass > 0 && c.dt > 0 && c.static_tol > 0)) {
    throw DomainError("DES configuration values must be positive");
  }
}

/// Squared one-dimensional star L2 discrepancy of values in [0, 1).
double marginal_discrepancy(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = v[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n);
    sum += e * e;
  }
  return 1.0 / (12.0 * n * n) + sum / n;
}

/// Shifts every coordinate (mod 1) to the offset with the least marginal
/// discrepancy, which keeps points off the faces of the cube.
void canonical_translation(Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  const int candidates = static_cast<int>(std::max<Eigen::Index>(64, 8 * n));
  std::vector<double> buf(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    auto objective = [&](double shift) {
      shift -= std::floor(shift);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double v = x(k, j) + shift;
        buf[static_cast<std::size_t>(j)] = v >= 1.0 ? v - 1.0 : v;
      }
      return marginal_discrepancy(buf);
    };
    double best_shift = 0.0;
    double best = objective(0.0);
    for (int c = 1; c < candidates; ++c) {
      const double shift = static_cast<double>(c) / candidates;
      const double val = objective(shift);
      if (val < best) {
        best = val;
        best_shift = shift;
      }
    }
    const double step = 1.0 / candidates;
    boost::uintmax_t iters = 60;
    const auto [a, fa] = boost::math::tools::brent_find_minima(objective, best_shift - step, best_shift + step, 40, iters);
    if (fa < best) best_shift = a - std::floor(a);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = x(k, j) + best_shift;
      x(k, j) = v >= 1.0 ? v - 1.0 : v;
    }
  }
}

}  // namespace

PointSet::PointSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (!((points_.array() >= 0.0).all() && (points_.array() <= 1.0).all())) {
    throw DomainError("point set entries must lie in [0, 1]");
  }
}

PointSet PointSet::uniform(std::size_t dims, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    for (Eigen::Index i = 0; i < pts.rows(); ++i) pts(i, j) = u(rng);
  return PointSet(std::move(pts));
}

double des_potential(const Eigen::MatrixXd& points, const DesConfig& config) {
  return evaluate(points, config).potential;
}

DesResult generate_des(std::size_t dims, std::size_t count, const DesConfig& config,
                       std::uint64_t seed) {
  if (dims < 1 || count < 2) throw DomainError("DES needs D >= 1 and N >= 2");
  check_config(config);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  const auto d = static_cast<Eigen::Index>(dims);
  const auto n = static_cast<Eigen::Index>(count);
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < d; ++i) x(i, j) = u(rng);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, n);

  Field field = evaluate(x, config);
  double energy = field.potential;
  DesResult result;
  if (config.record_energy) result.energy.push_back(energy);

  const double m = config.mass;
  const double kinetic_tol = config.static_tol * static_cast<double>(count);
  bool at_rest = true;
  for (std::size_t step = 0; step < config.max_steps; ++step) {
    result.steps = step + 1;
    double h = config.dt;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      // Semi-implicit update: explicit force, implicit damping.
      Eigen::MatrixXd v_new = (v + (h / m) * field.force) / (1.0 + h * config.damping / m);
      Eigen::MatrixXd x_new = x + h * v_new;
      wrap_into_torus(x_new);
      Field trial = evaluate(x_new, config);
      const double kinetic = 0.5 * m * v_new.squaredNorm();
      const double e_new = kinetic + trial.potential;
      if (std::isfinite(e_new) && e_new <= energy) {
        x = std::move(x_new);
        v = std::move(v_new);
        field = std::move(trial);
        energy = e_new;
        accepted = true;
        at_rest = false;
        if (kinetic < kinetic_tol) result.converged = true;
        break;
      }
      // Rejected: quench to rest so the energy drops to the potential; a
      // rejected step that already started from rest is halved instead.
      if (!at_rest) {
        v.setZero();
        energy = field.potential;
        at_rest = true;
      } else {
        h *= 0.5;
      }
    }
    if (config.record_energy) result.energy.push_back(energy);
    if (result.converged || !accepted) break;
  }
  canonical_translation(x);
  result.points = PointSet(std::move(x));
  return result;
}

std::vector<std::size_t> drr_permutation(std::size_t dims, std::mt19937_64& rng) {
  std::vector<std::size_t> remaining(dims);
  for (std::size_t i = 0; i < dims; ++i) remaining[i] = i;
  std::vector<std::size_t> perm;
  perm.reserve(dims);
  while (!remaining.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    const std::size_t idx = pick(rng);
    perm.push_back(remaining[idx]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return perm;
}

PointSet apply_row_permutation(const PointSet& set, const std::vector<std::size_t>& perm) {
  if (perm.size() != set.dims()) throw DomainError("permutation length does not match the dimension");
  Eigen::MatrixXd out(set.points().rows(), set.points().cols());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = set.points().row(static_cast<Eigen::Index>(perm[j]));
  }
  return PointSet(std::move(out));
}

PointSet drr(const PointSet& set, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return apply_row_permutation(set, drr_permutation(set.dims(), rng));
}

double l2_discrepancy_squared(const PointSet& set) {
  const Eigen::MatrixXd& p = set.points();
  const Eigen::Index d = p.rows();
  const Eigen::Index n = p.cols();
  if (n == 0) throw DomainError("discrepancy of an empty point set");
  const double nn = static_cast<double>(n);

  double single = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double prod = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) prod *= 0.5 * (1.0 - p(i, j) * p(i, j));
    single += prod;
  }
  double pairs = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) diag *= 1.0 - p(i, j);
    pairs += diag;
    for (Eigen::Index l = j + 1; l < n; ++l) {
      double prod = 1.0;
      for (Eigen::Index i = 0; i < d; ++i) prod *= 1.0 - std::max(p(i, j), p(i, l));
      pairs += 2.0 * prod;
    }
  }
  return std::pow(1.0 / 3.0, static_cast<double>(d)) - 2.0 / nn * single + pairs / (nn * nn);
}

double l2_discrepancy(const PointSet& set) {
  return std::sqrt(std::max(0.0, l2_discrepancy_squared(set)));
}

}  // namespace seisint
