#include "seisint/evo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "seisint/error.hpp"
#include "seisint/normal.hpp"

namespace seisint {

EsParams EsParams::defaults(std::size_t dim, std::size_t lambda) {
  if (dim < 1) throw DomainError("strategy dimension must be positive");
  EsParams p;
  const double n = static_cast<double>(dim);
  p.dim = dim;
  p.lambda = lambda == 0 ? 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(n))) : lambda;
  if (p.lambda < 2) throw DomainError("population size must be at least 2");
  p.mu = p.lambda / 2;
  p.weights.resize(static_cast<Eigen::Index>(p.mu));
  const double mu_prime = static_cast<double>(p.lambda) / 2.0;
  for (std::size_t i = 0; i < p.mu; ++i) {
    p.weights(static_cast<Eigen::Index>(i)) = std::log(mu_prime + 0.5) - std::log(static_cast<double>(i + 1));
  }
  p.weights /= p.weights.sum();
  p.mueff = 1.0 / p.weights.squaredNorm();

  p.cc = (4.0 + p.mueff / n) / (n + 4.0 + 2.0 * p.mueff / n);
  p.cs = (p.mueff + 2.0) / (n + p.mueff + 5.0);
  p.c1 = 2.0 / ((n + 1.3) * (n + 1.3) + p.mueff);
  p.cmu = std::min(1.0 - p.c1, 2.0 * (p.mueff - 2.0 + 1.0 / p.mueff) / ((n + 2.0) * (n + 2.0) + p.mueff));
  p.damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((p.mueff - 1.0) / (n + 1.0)) - 1.0) + p.cs;
  p.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return p;
}

EsState::EsState(Eigen::VectorXd m, double s, std::size_t lambda)
    : params(EsParams::defaults(static_cast<std::size_t>(m.size()), lambda)), mean(std::move(m)), sigma(s) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("initial step size must be positive");
  if (!mean.allFinite()) throw DomainError("initial mean must be finite");
  const auto n = mean.size();
  cov = Eigen::MatrixXd::Identity(n, n);
  basis = Eigen::MatrixXd::Identity(n, n);
  scales = Eigen::VectorXd::Ones(n);
  path_sigma = Eigen::VectorXd::Zero(n);
  path_c = Eigen::VectorXd::Zero(n);
}

void EsState::refresh_eigen() {
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance eigen-decomposition failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  const double floor = std::max(lam.maxCoeff(), 1.0) * 1e-20;
  if (lam.minCoeff() <= floor) {
    // Restore definiteness: lift the spectrum and rebuild C from it.
    lam = lam.cwiseMax(floor);
    cov = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  }
  basis = eig.eigenvectors();
  scales = lam.cwiseSqrt();
  eigen_generation = generation;
}

void EsState::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw NumericalError("step size left (0, inf)");
  if (!(scales.array() > 0.0).all()) throw NumericalError("covariance lost definiteness");
  const Eigen::MatrixXd rebuilt = basis * scales.array().square().matrix().asDiagonal() * basis.transpose();
  if ((rebuilt - cov).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, cov.cwiseAbs().maxCoeff())) {
    throw NumericalError("eigen cache does not reproduce the covariance");
  }
}

SequenceSource::SequenceSource(EsVariant variant, PointSet base, std::uint64_t seed)
    : variant_(variant), base_(std::move(base)), rng_(seed) {}

SequenceSource SequenceSource::random(std::uint64_t seed) { return {EsVariant::Random, PointSet(), seed}; }

SequenceSource SequenceSource::des(PointSet base, std::uint64_t seed) {
  if (base.count() == 0) throw DomainError("DES source needs a non-empty base set");
  return {EsVariant::Des, std::move(base), seed};
}

Eigen::VectorXd SequenceSource::uniform(std::size_t dim) {
  std::uniform_real_distribution<double> u;
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = u(rng_);
  return v;
}

Eigen::MatrixXd SequenceSource::next(std::size_t dim, std::size_t lambda) {
  const std::size_t gen = generation_++;
  if (variant_ == EsVariant::Random) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(lambda));
    for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) = uniform(dim);
    return out;
  }
  if (base_.dims() != dim || base_.count() != lambda) {
    throw DomainError("DES base set is " + std::to_string(base_.dims()) + "x" + std::to_string(base_.count()) +
                      ", strategy needs " + std::to_string(dim) + "x" + std::to_string(lambda));
  }
  if (gen == 0) return base_.points();
  return apply_row_permutation(base_, drr_permutation(dim, rng_)).points();
}

Eigen::VectorXd candidate_from_uniform(const EsState& state, const Eigen::VectorXd& eps) {
  Eigen::VectorXd z(eps.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) z(i) = normal_quantile(eps(i));
  return state.mean + state.sigma * (state.basis * state.scales.cwiseProduct(z));
}

Eigen::MatrixXd ask(const EsState& state, SequenceSource& source) {
  const Eigen::MatrixXd eps = source.next(state.dim(), state.lambda());
  Eigen::MatrixXd out(eps.rows(), eps.cols());
  for (Eigen::Index j = 0; j < eps.cols(); ++j) out.col(j) = candidate_from_uniform(state, eps.col(j));
  return out;
}

void tell(EsState& state, const Eigen::MatrixXd& candidates, const std::vector<double>& fitness) {
  const EsParams& p = state.params;
  const auto n = static_cast<Eigen::Index>(p.dim);
  if (candidates.rows() != n || static_cast<std::size_t>(candidates.cols()) != p.lambda ||
      fitness.size() != p.lambda) {
    throw DomainError("tell expects lambda candidates with lambda fitness values");
  }
  if (std::all_of(fitness.begin(), fitness.end(), [](double f) { return std::isnan(f); })) {
    throw NumericalError("every fitness value is NaN");
  }

  std::vector<std::size_t> order(p.lambda);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    return std::isnan(fitness[i]) ? std::numeric_limits<double>::infinity() : fitness[i];
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

  const Eigen::VectorXd old_mean = state.mean;
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(p.mu));
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < p.mu; ++k) {
    const auto col = candidates.col(static_cast<Eigen::Index>(order[k]));
    new_mean += p.weights(static_cast<Eigen::Index>(k)) * col;
    y.col(static_cast<Eigen::Index>(k)) = (col - old_mean) / state.sigma;
  }
  const Eigen::VectorXd y_w = (new_mean - old_mean) / state.sigma;
  state.mean = new_mean;
  state.generation += 1;

  const Eigen::MatrixXd inv_sqrt = state.basis * state.scales.cwiseInverse().asDiagonal() * state.basis.transpose();
  state.path_sigma = (1.0 - p.cs) * state.path_sigma + std::sqrt(p.cs * (2.0 - p.cs) * p.mueff) * (inv_sqrt * y_w);
  const double ps_norm = state.path_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - p.cs, 2.0 * static_cast<double>(state.generation));
  const bool hsig = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (static_cast<double>(p.dim) + 1.0)) * p.chi_n;
  state.path_c = (1.0 - p.cc) * state.path_c;
  if (hsig) state.path_c += std::sqrt(p.cc * (2.0 - p.cc) * p.mueff) * y_w;

  const double delta = hsig ? 0.0 : p.cc * (2.0 - p.cc);
  Eigen::MatrixXd rank_mu = y * p.weights.asDiagonal() * y.transpose();
  state.cov = (1.0 - p.c1 - p.cmu) * state.cov + p.c1 * (state.path_c * state.path_c.transpose() + delta * state.cov) +
              p.cmu * rank_mu;

  state.sigma *= std::exp(p.cs / p.damps * (ps_norm / p.chi_n - 1.0));
  if (!std::isfinite(state.sigma) || state.sigma <= 0.0) throw NumericalError("step size diverged");

  const double lag = static_cast<double>(p.lambda) / (p.c1 + p.cmu) / static_cast<double>(p.dim) / 10.0;
  if (static_cast<double>(state.generation - state.eigen_generation) > lag) {
    state.refresh_eigen();
  } else {
    state.cov = 0.5 * (state.cov + state.cov.transpose());
  }
}

bool Box::contains(const Eigen::VectorXd& x) const {
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

MinimizeResult minimize(const Objective& objective, const Box& box, const MinimizeConfig& config) {
  const std::size_t dim = static_cast<std::size_t>(box.lower.size());
  if (dim == 0 || box.upper.size() != box.lower.size() || !(box.upper.array() > box.lower.array()).all()) {
    throw DomainError("box bounds must be non-empty with lower < upper");
  }
  const Eigen::VectorXd x0 = config.x0.value_or(0.5 * (box.lower + box.upper));
  if (x0.size() != box.lower.size()) throw DomainError("initial mean dimension does not match the box");
  const double width = (box.upper - box.lower).mean();
  EsState state(x0, config.sigma_fraction * width, config.lambda);
  if (state.lambda() < 4) throw DomainError("population size must be at least 4");

  SequenceSource source = config.variant == EsVariant::Des
                              ? SequenceSource::des(generate_des(dim, state.lambda(), config.des, config.seed).points,
                                                    config.seed + 1)
                              : SequenceSource::random(config.seed);

  MinimizeResult result;
  result.best_f = std::numeric_limits<double>::infinity();
  std::vector<double> fitness(state.lambda());
  for (std::size_t g = 0; g < config.max_iters; ++g) {
    Eigen::MatrixXd x = ask(state, source);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      Eigen::VectorXd xj = x.col(j);
      for (std::size_t r = 0; r < config.resample_limit && !box.contains(xj); ++r) {
        xj = candidate_from_uniform(state, source.uniform(dim));
      }
      x.col(j) = xj.cwiseMax(box.lower).cwiseMin(box.upper);
      const double f = objective(x.col(j));
      fitness[static_cast<std::size_t>(j)] = f;
      ++result.evaluations;
      if (f < result.best_f || result.best_x.size() == 0) {
        result.best_f = f;
        result.best_x = x.col(j);
      }
    }
    result.generations = g + 1;
    result.history.push_back(result.best_f);
    if (config.target && result.best_f <= *config.target) {
      result.converged = true;
      break;
    }
    tell(state, x, fitness);
  }
  return result;
}

}  // namespace seisint
