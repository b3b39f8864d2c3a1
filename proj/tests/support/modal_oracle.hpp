#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "seisint/shear_frame.hpp"
#include "seisint/spectra.hpp"

namespace oracle {

// exp(A) by scaling and squaring a Taylor series.
inline Eigen::Matrix4d expm(const Eigen::Matrix4d& a) {
  int k = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++k;
  }
  const Eigen::Matrix4d b = a / std::pow(2.0, k);
  Eigen::Matrix4d term = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d sum = Eigen::Matrix4d::Identity();
  for (int i = 1; i < 20; ++i) {
    term = term * b / i;
    sum += term;
  }
  for (int i = 0; i < k; ++i) sum = sum * sum;
  return sum;
}

struct Modal {
  Eigen::MatrixXd disp;
  Eigen::MatrixXd acc;  // absolute
};

// Linear frame by modal superposition. Each mode is propagated exactly
// under the piecewise-linear ground acceleration (state q, q', p, p').
inline Modal modal_response(const seisint::ShearFrame& f, const seisint::GroundMotion& g) {
  const Eigen::MatrixXd m = f.mass_matrix();
  const Eigen::MatrixXd k = f.stiffness_matrix();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  const Eigen::MatrixXd phi = es.eigenvectors();
  const auto n = m.rows();
  const auto steps = static_cast<Eigen::Index>(g.grid.count);
  const double dt = g.grid.step;
  Modal out{Eigen::MatrixXd::Zero(steps, n), Eigen::MatrixXd::Zero(steps, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w2 = es.eigenvalues()(j);
    const double c = f.damping.a0 + f.damping.a1 * w2;
    const double gamma = phi.col(j).dot(m * Eigen::VectorXd::Ones(n));
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 1) = 1.0;
    a(1, 0) = -w2;
    a(1, 1) = -c;
    a(1, 2) = 1.0;
    a(2, 3) = 1.0;
    const Eigen::Matrix4d prop = expm(a * dt);
    Eigen::Vector4d s = Eigen::Vector4d::Zero();
    for (Eigen::Index i = 0; i < steps; ++i) {
      const double p = -gamma * g.values[static_cast<std::size_t>(i)];
      s(2) = p;
      const double qdd = -w2 * s(0) - c * s(1) + p;
      out.disp.row(i) += phi.col(j).transpose() * s(0);
      out.acc.row(i) += phi.col(j).transpose() * qdd;
      if (i + 1 < steps) {
        s(3) = (-gamma * g.values[static_cast<std::size_t>(i + 1)] - p) / dt;
        s = prop * s;
      }
    }
  }
  for (Eigen::Index i = 0; i < steps; ++i) out.acc.row(i).array() += g.values[static_cast<std::size_t>(i)];
  return out;
}

inline double rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

}  // namespace oracle
