#include "seisint/interval_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kStructureTol = 1e-12;
constexpr double kSingularRatio = 1e-14;

Eigen::VectorXd midrange(const Eigen::MatrixXd& samples) {
  return 0.5 * (samples.rowwise().maxCoeff() + samples.rowwise().minCoeff());
}

/// Eigen-decomposition with eigenvalues floored at `floor`.
struct FlooredEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

FlooredEigen floored_eigen(const Eigen::MatrixXd& sym, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
  FlooredEigen out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index j = 0; j < out.values.size(); ++j) out.values(j) = std::max(out.values(j), floor);
  return out;
}

/// Quadratic forms a_k^T S^{-1} a_k for every column of `centered`.
Eigen::VectorXd quadratic_forms(const FlooredEigen& eig, const Eigen::MatrixXd& centered) {
  const Eigen::MatrixXd proj = eig.vectors.transpose() * centered;
  Eigen::VectorXd out(centered.cols());
  for (Eigen::Index k = 0; k < centered.cols(); ++k) {
    out(k) = (proj.col(k).array().square() / eig.values.array()).sum();
  }
  return out;
}

Eigen::MatrixXd to_correlation(const Eigen::MatrixXd& cov, Eigen::VectorXd& radius_out) {
  radius_out = cov.diagonal().cwiseSqrt();
  const Eigen::VectorXd inv = radius_out.cwiseInverse();
  Eigen::MatrixXd rho = inv.asDiagonal() * cov * inv.asDiagonal();
  rho = 0.5 * (rho + rho.transpose()).eval();
  rho.diagonal().setOnes();
  return rho;
}

/// Rescales the radius so the largest sample Mahalanobis value is exactly one.
IntervalProcess calibrate(const IntervalProcess& draft, const Eigen::MatrixXd& samples) {
  const MahalanobisForm form(draft);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < samples.cols(); ++k) worst = std::max(worst, form(samples.col(k)));
  if (!(worst > 0.0)) return draft;
  return IntervalProcess(draft.grid(), draft.median(), draft.radius() * std::sqrt(worst),
                         draft.correlation(), draft.stationary());
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& centered) {
  return centered * centered.transpose() / static_cast<double>(centered.cols());
}

void reject_zero_spread(double trace, const MripOptions& options) {
  if (trace == 0.0 && options.radius_floor <= 0.0) {
    throw DomainError("ensemble has zero spread; set a radius floor to fit it anyway");
  }
}

IntervalProcess construct_exact(const SampleEnsemble& ensemble, const MripOptions& options) {
  const auto n = static_cast<Eigen::Index>(ensemble.grid.count);
  const Eigen::Index ns = ensemble.samples.cols();
  Eigen::VectorXd center = midrange(ensemble.samples);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(ns, 1.0 / static_cast<double>(ns));
  Eigen::MatrixXd shape;
  double last_trace = std::numeric_limits<double>::infinity();

  for (std::size_t it = 0; it < options.exact_iterations; ++it) {
    const Eigen::MatrixXd centered = ensemble.samples.colwise() - center;
    Eigen::MatrixXd weighted = centered * w.asDiagonal() * centered.transpose();
    double tr = weighted.trace();
    reject_zero_spread(tr, options);
    if (options.radius_floor > 0.0) weighted.diagonal().array() += options.radius_floor * options.radius_floor;
    tr = weighted.trace();
    // Stationarity of the Lagrangian gives C = W^{1/2}.
    const FlooredEigen eig = floored_eigen(weighted, options.eigen_floor * tr / static_cast<double>(n));
    FlooredEigen root{eig.values.cwiseSqrt(), eig.vectors};
    const Eigen::VectorXd m = quadratic_forms(root, centered);
    const double scale = std::max(m.maxCoeff(), 1e-300);
    shape = scale * (root.vectors * root.values.asDiagonal() * root.vectors.transpose());
    const double trace = shape.trace();

    // Multiplicative ascent on the dual weights: fixed point has m_k = 1 on the support.
    for (Eigen::Index k = 0; k < ns; ++k) w(k) *= m(k);
    center = (ensemble.samples * w) / w.sum();

    if (std::abs(last_trace - trace) <= 1e-13 * trace) break;
    last_trace = trace;
  }

  Eigen::VectorXd radius;
  const Eigen::MatrixXd rho = to_correlation(shape, radius);
  return calibrate(IntervalProcess(ensemble.grid, center, radius, rho, false), ensemble.samples);
}

}  // namespace

SampleEnsemble SampleEnsemble::from_motions(const std::vector<GroundMotion>& motions) {
  if (motions.empty()) throw DomainError("ensemble needs at least one motion");
  SampleEnsemble ens;
  ens.grid = motions.front().grid;
  ens.samples.resize(static_cast<Eigen::Index>(ens.grid.count), static_cast<Eigen::Index>(motions.size()));
  for (std::size_t k = 0; k < motions.size(); ++k) {
    if (!(motions[k].grid == ens.grid) || motions[k].values.size() != ens.grid.count) {
      throw DomainError("ensemble motions must share one grid");
    }
    ens.samples.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(motions[k].values.data(), static_cast<Eigen::Index>(ens.grid.count));
  }
  return ens;
}

void SampleEnsemble::validate() const {
  grid.validate();
  if (samples.rows() != static_cast<Eigen::Index>(grid.count)) {
    throw DomainError("sample length does not match the grid");
  }
  if (samples.cols() < 2) throw DomainError("ensemble needs at least two samples");
  if (!samples.allFinite()) throw DomainError("ensemble contains non-finite values");
}

IntervalProcess::IntervalProcess(TimeGrid grid, Eigen::VectorXd median, Eigen::VectorXd radius,
                                 Eigen::MatrixXd correlation, bool stationary)
    : grid_(grid),
      median_(std::move(median)),
      radius_(std::move(radius)),
      correlation_(std::move(correlation)),
      stationary_(stationary) {
  grid_.validate();
  const auto n = static_cast<Eigen::Index>(grid_.count);
  if (median_.size() != n || radius_.size() != n || correlation_.rows() != n || correlation_.cols() != n) {
    throw DomainError("interval process dimensions do not match the grid");
  }
  if (!median_.allFinite() || !radius_.allFinite() || !correlation_.allFinite()) {
    throw DomainError("interval process contains non-finite values");
  }
  if (!(radius_.array() > 0.0).all()) throw DomainError("interval radius must be positive at every instant");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(correlation_(i, i) - 1.0) > kStructureTol) throw DomainError("correlation diagonal must be one");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(correlation_(i, j) - correlation_(j, i)) > kStructureTol) {
        throw DomainError("correlation must be symmetric");
      }
    }
  }
  correlation_ = 0.5 * (correlation_ + correlation_.transpose()).eval();
  correlation_.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(correlation_);
  if (llt.info() != Eigen::Success) throw DomainError("correlation must be positive definite");
  if (stationary_) {
    for (Eigen::Index i = 1; i < n; ++i) {
      if (median_(i) != median_(0) || radius_(i) != radius_(0)) {
        throw DomainError("stationary process needs constant median and radius");
      }
    }
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if (std::abs(correlation_(i, j) - correlation_(i - j, 0)) > kStructureTol) {
          throw DomainError("stationary process needs a Toeplitz correlation");
        }
      }
    }
  }
}

Eigen::MatrixXd IntervalProcess::covariance() const {
  return radius_.asDiagonal() * correlation_ * radius_.asDiagonal();
}

Characteristic characteristic_params(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (lower.size() != upper.size()) throw DomainError("bound vectors differ in length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (lower(i) > upper(i)) {
      throw DomainError("lower bound exceeds upper bound at instant " + std::to_string(i));
    }
  }
  return {0.5 * (upper + lower), 0.5 * (upper - lower)};
}

MahalanobisForm::MahalanobisForm(const IntervalProcess& process)
    : median_(process.median()), inv_radius_(process.radius().cwiseInverse()) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(process.correlation());
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the correlation failed");
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double smallest = lam.minCoeff();
  if (!(smallest > kSingularRatio * lam.maxCoeff())) {
    std::ostringstream msg;
    msg << "covariance is singular: smallest correlation eigenvalue " << smallest
        << " (largest " << lam.maxCoeff() << ")";
    throw NumericalError(msg.str());
  }
  whitening_ = lam.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

double MahalanobisForm::operator()(const Eigen::VectorXd& sample) const {
  if (sample.size() != median_.size()) throw DomainError("sample length does not match the process");
  const Eigen::VectorXd z = (sample - median_).cwiseProduct(inv_radius_);
  return (whitening_ * z).squaredNorm();
}

double mahalanobis(const IntervalProcess& process, const Eigen::VectorXd& sample) {
  return MahalanobisForm(process)(sample);
}

IntervalProcess construct_mrip(const SampleEnsemble& ensemble, const MripOptions& options) {
  ensemble.validate();
  if (options.exact) return construct_exact(ensemble, options);

  const auto n = static_cast<double>(ensemble.grid.count);
  const Eigen::VectorXd center = midrange(ensemble.samples);
  const Eigen::MatrixXd centered = ensemble.samples.colwise() - center;
  Eigen::MatrixXd s = scatter(centered);
  reject_zero_spread(s.trace(), options);
  if (options.radius_floor > 0.0) s.diagonal().array() += options.radius_floor * options.radius_floor;

  const FlooredEigen eig = floored_eigen(s, options.eigen_floor * s.trace() / n);
  const Eigen::VectorXd m = quadratic_forms(eig, centered);
  double scale = m.maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  const Eigen::MatrixXd cov =
      scale * (eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose());

  Eigen::VectorXd radius;
  const Eigen::MatrixXd rho = to_correlation(cov, radius);
  return calibrate(IntervalProcess(ensemble.grid, center, radius, rho, false), ensemble.samples);
}

IntervalProcess construct_mrsip(const SampleEnsemble& ensemble, const MripOptions& options) {
  ensemble.validate();
  const auto n = static_cast<Eigen::Index>(ensemble.grid.count);
  const double center = 0.5 * (ensemble.samples.maxCoeff() + ensemble.samples.minCoeff());
  const Eigen::MatrixXd centered = ensemble.samples.array() - center;
  const Eigen::MatrixXd s = scatter(centered);

  // Diagonal averaging projects the scatter onto symmetric Toeplitz matrices.
  Eigen::VectorXd lag(n);
  for (Eigen::Index tau = 0; tau < n; ++tau) {
    lag(tau) = s.diagonal(tau).mean();
  }
  reject_zero_spread(lag(0), options);
  if (options.radius_floor > 0.0) lag(0) += options.radius_floor * options.radius_floor;

  auto toeplitz = [n](const Eigen::VectorXd& v) {
    Eigen::MatrixXd t(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) t(i, j) = v(std::abs(i - j));
    return t;
  };

  // A diagonal shift is the only eigenvalue repair that keeps the Toeplitz
  // structure. With rho = (T + d I) / (t0 + d) the binding radius is
  // r^2(d) = (t0 + d) max_k z_k^T (T + d I)^{-1} z_k, minimized over d.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(toeplitz(lag));
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the Toeplitz estimate failed");
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd coords = (es.eigenvectors().transpose() * centered).array().square().matrix();
  const double t0 = lag(0);
  const double floor = options.eigen_floor * t0;
  const double shift_min = std::max(0.0, floor - lam.minCoeff());
  auto radius_sq = [&](double shift) {
    const Eigen::VectorXd inv = (lam.array() + shift).inverse().matrix();
    return (t0 + shift) * (inv.transpose() * coords).maxCoeff();
  };
  // Log-spaced scan from the definiteness bound up to 1e6 t0, then Brent.
  const double lo = std::max(shift_min, 1e-12 * t0);
  const double hi = 1e6 * t0;
  constexpr int kScan = 240;
  double best_log = std::log(lo);
  double best_val = radius_sq(shift_min);
  double best_shift = shift_min;
  for (int i = 0; i <= kScan; ++i) {
    const double lg = std::log(lo) + (std::log(hi) - std::log(lo)) * i / kScan;
    const double val = radius_sq(std::exp(lg));
    if (val < best_val) {
      best_val = val;
      best_log = lg;
      best_shift = std::exp(lg);
    }
  }
  const double cell = (std::log(hi) - std::log(lo)) / kScan;
  boost::uintmax_t iters = 100;
  const auto refined = boost::math::tools::brent_find_minima(
      [&](double lg) { return radius_sq(std::exp(lg)); }, best_log - cell, best_log + cell, 50, iters);
  if (refined.second < best_val && std::exp(refined.first) >= shift_min) best_shift = std::exp(refined.first);

  Eigen::VectorXd rho_lag = lag / (t0 + best_shift);
  rho_lag(0) = 1.0;
  const Eigen::MatrixXd rho = toeplitz(rho_lag);
  Eigen::LLT<Eigen::MatrixXd> llt(rho);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Toeplitz repair could not restore positive definiteness");
  }

  const Eigen::MatrixXd whitened = llt.matrixL().solve(centered);
  double scale = whitened.colwise().squaredNorm().maxCoeff();
  if (!(scale > 0.0)) scale = t0;
  const double radius = std::sqrt(scale);
  IntervalProcess draft(ensemble.grid, Eigen::VectorXd::Constant(n, center),
                        Eigen::VectorXd::Constant(n, radius), rho, true);
  return calibrate(draft, ensemble.samples);
}

KlBasis::KlBasis(std::shared_ptr<const IntervalProcess> process, double energy_fraction)
    : process_(std::move(process)), energy_fraction_(energy_fraction) {
  if (!process_) throw DomainError("K-L basis needs a process");
  if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) {
    throw DomainError("energy fraction must lie in (0, 1]");
  }
  const auto n = static_cast<Eigen::Index>(process_->size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(process_->correlation());
  if (es.info() != Eigen::Success) throw NumericalError("eigen-decomposition of the correlation failed");

  eigenvalues_ = es.eigenvalues().reverse();
  eigenvectors_ = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index peak = 0;
    eigenvectors_.col(j).cwiseAbs().maxCoeff(&peak);
    if (eigenvectors_(peak, j) < 0.0) eigenvectors_.col(j) *= -1.0;
  }

  Eigen::VectorXd cumulative(n);
  double running = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    running += eigenvalues_(j);
    cumulative(j) = running;
  }
  const double total = cumulative(n - 1);
  order_ = static_cast<std::size_t>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (cumulative(j) >= energy_fraction * total) {
      order_ = static_cast<std::size_t>(j + 1);
      break;
    }
  }

  const Eigen::VectorXd root = eigenvalues_.cwiseMax(0.0).cwiseSqrt();
  scaled_modes_ = process_->radius().asDiagonal() * eigenvectors_ * root.asDiagonal();
}

KlBasis KlBasis::with_order(std::size_t order) const {
  if (order < 1 || order > process_->size()) throw DomainError("truncation order out of range");
  KlBasis copy = *this;
  copy.order_ = order;
  return copy;
}

Eigen::VectorXd KlBasis::reconstruct(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != order_) {
    throw DomainError("theta has " + std::to_string(theta.size()) + " components, basis order is " +
                      std::to_string(order_));
  }
  const auto m = static_cast<Eigen::Index>(order_);
  return process_->median() + scaled_modes_.leftCols(m) * theta;
}

Eigen::VectorXd KlBasis::project(const Eigen::VectorXd& path) const {
  if (static_cast<std::size_t>(path.size()) != process_->size()) {
    throw DomainError("path length does not match the process");
  }
  const auto m = static_cast<Eigen::Index>(order_);
  const Eigen::VectorXd z = (path - process_->median()).cwiseQuotient(process_->radius());
  return (eigenvectors_.leftCols(m).transpose() * z).cwiseQuotient(eigenvalues_.head(m).cwiseSqrt());
}

KlBasis kl_decompose(const IntervalProcess& process, double energy_fraction) {
  return KlBasis(std::make_shared<const IntervalProcess>(process), energy_fraction);
}

GroundMotion kl_reconstruct(const KlBasis& basis, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd path = basis.reconstruct(theta);
  return GroundMotion{basis.process().grid(), std::vector<double>(path.data(), path.data() + path.size())};
}

Eigen::MatrixXd sample_hypersphere(std::size_t dim, std::size_t count, std::uint64_t seed) {
  if (dim < 1 || count < 1) throw DomainError("hypersphere sampling needs dim >= 1 and count >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    double norm = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) out(i, c) = normal(rng);
      norm = out.col(c).norm();
    } while (norm == 0.0);
    const double radius = std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
    out.col(c) *= radius / norm;
  }
  return out;
}

}  // namespace seisint
