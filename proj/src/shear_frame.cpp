#include "seisint/shear_frame.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// |z|^{n-1} z and |z|^n without pow for the common n = 1.
inline void powers(double z, double n, double& odd, double& even) {
  if (n == 1.0) {
    odd = z;
    even = std::abs(z);
  } else {
    even = std::pow(std::abs(z), n);
    odd = z == 0.0 ? 0.0 : even / std::abs(z) * z;
  }
}

/// Right-hand side of the augmented system on flat storage
/// y = [x (n), v (n), z (n), e (n)].
class Dynamics {
 public:
  explicit Dynamics(const ShearFrame& frame)
      : n_(frame.stories()),
        mass_(frame.masses),
        k_(frame.stiffness),
        alpha_(frame.alpha),
        a0_(frame.damping.a0),
        a1_(frame.damping.a1),
        bw_(frame.bouc_wen),
        inert_(frame.bouc_wen.dv == 0.0 && frame.bouc_wen.deta == 0.0 && frame.bouc_wen.p == 0.0),
        force_(n_),
        cv_(n_) {}

  [[nodiscard]] std::size_t size() const { return 4 * n_; }

  /// Absolute floor accelerations -M^{-1}(C v + f) for state y.
  void absolute_acceleration(const double* y, double* out) {
    forces(y);
    for (std::size_t i = 0; i < n_; ++i) out[i] = -(cv_[i] + force_[i]) / mass_[i];
  }

  void operator()(const double* y, double ground, double* dy) {
    const double* v = y + n_;
    const double* z = y + 2 * n_;
    const double* e = y + 3 * n_;
    forces(y);
    for (std::size_t i = 0; i < n_; ++i) {
      dy[i] = v[i];
      dy[n_ + i] = -(cv_[i] + force_[i]) / mass_[i] - ground;
      const double drift_rate = v[i] - (i == 0 ? 0.0 : v[i - 1]);
      dy[2 * n_ + i] = inert_ ? plain_rate(drift_rate, z[i]) : bouc_wen_rate(drift_rate, z[i], bw_, e[i]);
      dy[3 * n_ + i] = z[i] * drift_rate;
    }
  }

 private:
  double plain_rate(double v, double z) const {
    double odd;
    double even;
    powers(z, bw_.n, odd, even);
    return bw_.a * v - (bw_.beta * std::abs(v) * odd + bw_.gamma * v * even);
  }

  /// Fills force_ (story restoring forces per floor) and cv_ (C v).
  void forces(const double* y) {
    const double* x = y;
    const double* v = y + n_;
    const double* z = y + 2 * n_;
    double above_story = 0.0;
    double above_elastic = 0.0;
    for (std::size_t ii = n_; ii-- > 0;) {
      const double drift = x[ii] - (ii == 0 ? 0.0 : x[ii - 1]);
      const double story = alpha_ * k_[ii] * drift + (1.0 - alpha_) * k_[ii] * z[ii];
      force_[ii] = story - above_story;
      above_story = story;
      // Elastic K v for the stiffness-proportional damping term.
      const double drift_rate = v[ii] - (ii == 0 ? 0.0 : v[ii - 1]);
      const double elastic = k_[ii] * drift_rate;
      cv_[ii] = a0_ * mass_[ii] * v[ii] + a1_ * (elastic - above_elastic);
      above_elastic = elastic;
    }
  }

  std::size_t n_;
  std::vector<double> mass_;
  std::vector<double> k_;
  double alpha_;
  double a0_;
  double a1_;
  BoucWenParams bw_;
  bool inert_;
  std::vector<double> force_;
  std::vector<double> cv_;
};

}  // namespace

void BoucWenParams::validate() const {
  if (!(n >= 1.0)) throw DomainError("Bouc-Wen exponent n must be >= 1");
  if (!(zeta_s > 0.0 && zeta_s <= 1.0)) throw DomainError("Bouc-Wen zeta_s must lie in (0, 1]");
  if (!(a > 0.0) || beta < 0.0 || gamma < 0.0 || dv < 0.0 || deta < 0.0 || p < 0.0) {
    throw DomainError("Bouc-Wen parameters must be non-negative with A > 0");
  }
  if (!(psi > 0.0) || dpsi < 0.0 || !(lambda > 0.0)) throw DomainError("Bouc-Wen pinching parameters out of range");
}

double bouc_wen_rate(double velocity, double z, const BoucWenParams& bw, double energy) {
  const double nu = 1.0 + bw.dv * energy;
  const double eta = 1.0 + bw.deta * energy;
  double odd;
  double even;
  powers(z, bw.n, odd, even);
  const double core = bw.a * velocity - nu * (bw.beta * std::abs(velocity) * odd + bw.gamma * velocity * even);
  double h = 1.0;
  if (bw.p != 0.0) {
    const double zeta1 = bw.zeta_s * (1.0 - std::exp(-bw.p * energy));
    const double zeta2 = (bw.psi + bw.dpsi * energy) * (bw.lambda + zeta1);
    const double zu = std::pow(bw.a / (nu * (bw.beta + bw.gamma)), 1.0 / bw.n);
    const double sgn = velocity > 0.0 ? 1.0 : (velocity < 0.0 ? -1.0 : 0.0);
    const double arg = (z * sgn - bw.q * zu) / zeta2;
    h = 1.0 - zeta1 * std::exp(-arg * arg);
  }
  return h * core / eta;
}

Rayleigh rayleigh_coefficients(double omega1, double omega2, double zeta) {
  if (!(omega1 > 0.0) || !(omega2 > omega1)) throw DomainError("Rayleigh fit needs 0 < omega1 < omega2");
  if (zeta < 0.0) throw DomainError("damping ratio must be non-negative");
  const double sum = omega1 + omega2;
  return {2.0 * zeta * omega1 * omega2 / sum, 2.0 * zeta / sum};
}

ShearFrame ShearFrame::uniform(std::size_t stories, double mass, double period, double zeta, double alpha) {
  if (stories < 1) throw DomainError("frame needs at least one story");
  if (period <= 0.0) period = 0.1 * static_cast<double>(stories);
  const double n = static_cast<double>(stories);
  const double omega1 = 2.0 * kPi / period;
  // omega_1 = 2 sqrt(k / m) sin(pi / (4 n + 2)) for equal stories.
  const double root = omega1 / (2.0 * std::sin(kPi / (4.0 * n + 2.0)));
  ShearFrame f;
  f.masses.assign(stories, mass);
  f.stiffness.assign(stories, mass * root * root);
  f.alpha = alpha;
  if (stories == 1) {
    f.damping = {0.0, 2.0 * zeta / omega1};
  } else {
    const Eigen::VectorXd w = f.natural_frequencies();
    f.damping = rayleigh_coefficients(w(0), w(1), zeta);
  }
  f.validate();
  return f;
}

Eigen::MatrixXd ShearFrame::mass_matrix() const {
  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(masses.data(), static_cast<Eigen::Index>(masses.size()));
  return m.asDiagonal();
}

Eigen::MatrixXd ShearFrame::stiffness_matrix() const {
  const auto n = static_cast<Eigen::Index>(stories());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ki = stiffness[static_cast<std::size_t>(i)];
    k(i, i) += ki;
    if (i > 0) {
      k(i - 1, i - 1) += ki;
      k(i - 1, i) -= ki;
      k(i, i - 1) -= ki;
    }
  }
  return k;
}

Eigen::MatrixXd ShearFrame::damping_matrix() const {
  return damping.a0 * mass_matrix() + damping.a1 * stiffness_matrix();
}

Eigen::VectorXd ShearFrame::natural_frequencies() const {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(stiffness_matrix(), mass_matrix());
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

void ShearFrame::validate() const {
  if (masses.empty() || masses.size() != stiffness.size()) {
    throw DomainError("frame needs matching, non-empty mass and stiffness lists");
  }
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] > 0.0) || !(stiffness[i] > 0.0)) throw DomainError("story masses and stiffnesses must be positive");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("post-yield ratio must lie in [0, 1]");
  if (damping.a0 < 0.0 || damping.a1 < 0.0) throw DomainError("Rayleigh coefficients must be non-negative");
  bouc_wen.validate();
}

ResponseHistory simulate(const ShearFrame& frame, const GroundMotion& ground, const SolverConfig& config) {
  frame.validate();
  ground.grid.validate();
  if (ground.values.size() != ground.grid.count) throw DomainError("ground motion length does not match its grid");
  if (config.substeps < 1) throw DomainError("at least one substep is required");

  const std::size_t n = frame.stories();
  const std::size_t steps = ground.grid.count;
  const double dt = ground.grid.step;

  std::size_t substeps = config.substeps;
  const double omega_max = frame.natural_frequencies().maxCoeff();
  const double limit = config.stability_limit > 0.0 ? config.stability_limit : 1.0;
  while (dt / static_cast<double>(substeps) * omega_max > limit) substeps *= 2;
  const double h = dt / static_cast<double>(substeps);

  Dynamics dyn(frame);
  const std::size_t size = dyn.size();
  std::vector<double> y(size, 0.0), k1(size), k2(size), k3(size), k4(size), tmp(size), acc(n);

  ResponseHistory out;
  out.grid = ground.grid;
  const auto rows = static_cast<Eigen::Index>(steps);
  const auto cols = static_cast<Eigen::Index>(n);
  out.displacement = Eigen::MatrixXd::Zero(rows, cols);
  out.velocity = Eigen::MatrixXd::Zero(rows, cols);
  out.acceleration = Eigen::MatrixXd::Zero(rows, cols);
  out.hysteretic = Eigen::MatrixXd::Zero(rows, cols);

  auto record = [&](std::size_t i) {
    dyn.absolute_acceleration(y.data(), acc.data());
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      out.displacement(r, c) = y[j];
      out.velocity(r, c) = y[n + j];
      out.acceleration(r, c) = acc[j];
      out.hysteretic(r, c) = y[2 * n + j];
    }
  };
  record(0);

  for (std::size_t i = 0; i + 1 < steps; ++i) {
    const double g0 = ground.values[i];
    const double g1 = ground.values[i + 1];
    for (std::size_t s = 0; s < substeps; ++s) {
      const double f0 = static_cast<double>(s) / static_cast<double>(substeps);
      const double fh = (static_cast<double>(s) + 0.5) / static_cast<double>(substeps);
      const double f1 = static_cast<double>(s + 1) / static_cast<double>(substeps);
      const double ua = g0 + (g1 - g0) * f0;
      const double um = g0 + (g1 - g0) * fh;
      const double ub = g0 + (g1 - g0) * f1;
      dyn(y.data(), ua, k1.data());
      for (std::size_t k = 0; k < size; ++k) tmp[k] = y[k] + 0.5 * h * k1[k];
      dyn(tmp.data(), um, k2.data());
      for (std::size_t k = 0; k < size; ++k) tmp[k] = y[k] + 0.5 * h * k2[k];
      dyn(tmp.data(), um, k3.data());
      for (std::size_t k = 0; k < size; ++k) tmp[k] = y[k] + h * k3[k];
      dyn(tmp.data(), ub, k4.data());
      for (std::size_t k = 0; k < size; ++k) y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
      std::ostringstream os;
      os << "structural state became non-finite at t = " << ground.grid.at(i + 1) << " s";
      throw NumericalError(os.str());
    }
    record(i + 1);
  }
  return out;
}

}  // namespace seisint
