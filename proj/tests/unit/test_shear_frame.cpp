#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "seisint/error.hpp"
#include "seisint/shear_frame.hpp"
#include "seisint/spectra.hpp"
#include "modal_oracle.hpp"

using namespace seisint;

namespace {

constexpr double kPi = 3.14159265358979323846;

ShearFrame linear(ShearFrame f) {
  f.bouc_wen.beta = 0.0;
  f.bouc_wen.gamma = 0.0;
  return f;
}

GroundMotion harmonic(double amp, double w, double duration, double dt) {
  const TimeGrid g = TimeGrid::covering(duration, dt);
  GroundMotion m{g, std::vector<double>(g.count)};
  for (std::size_t i = 0; i < g.count; ++i) m.values[i] = amp * std::sin(w * g.at(i));
  return m;
}

GroundMotion scaled(GroundMotion m, double s) {
  for (double& v : m.values) v *= s;
  return m;
}

GroundMotion record(std::uint64_t seed) {
  SynthesisOptions so;
  return synthesize_accelerogram(so, TimeGrid::covering(10.0, 0.02), seed);
}

double mechanical_energy(const ShearFrame& f, const ResponseHistory& h, Eigen::Index i) {
  const Eigen::VectorXd x = h.displacement.row(i).transpose();
  const Eigen::VectorXd v = h.velocity.row(i).transpose();
  return 0.5 * v.dot(f.mass_matrix() * v) + 0.5 * x.dot(f.stiffness_matrix() * x);
}

}  // namespace

TEST_CASE("Rayleigh coefficients") {
  const auto r = rayleigh_coefficients(2.0, 4.0, 0.05);
  CHECK(r.a0 == doctest::Approx(0.133333).epsilon(1e-5));
  CHECK(r.a1 == doctest::Approx(0.0166667).epsilon(1e-5));
  for (double w : {2.0, 4.0}) CHECK(r.a0 / (2.0 * w) + r.a1 * w / 2.0 == doctest::Approx(0.05).epsilon(1e-12));
  const auto z = rayleigh_coefficients(2.0, 4.0, 0.0);
  CHECK(z.a0 == 0.0);
  CHECK(z.a1 == 0.0);
  CHECK_THROWS_AS(rayleigh_coefficients(3.0, 3.0, 0.05), DomainError);
}

TEST_CASE("Bouc-Wen rate") {
  BoucWenParams p;
  CHECK(bouc_wen_rate(0.0, 0.02, p) == 0.0);
  CHECK(bouc_wen_rate(1.0, 0.01, p) == doctest::Approx(-0.65).epsilon(1e-12));
  for (double v : {0.3, -2.0}) {
    for (double z : {0.004, -0.01, 0.0}) CHECK(bouc_wen_rate(-v, -z, p) == doctest::Approx(-bouc_wen_rate(v, z, p)).epsilon(1e-14));
  }
  BoucWenParams lin = p;
  lin.beta = lin.gamma = 0.0;
  CHECK(bouc_wen_rate(0.37, 0.5, lin) == doctest::Approx(0.37).epsilon(1e-15));

  // Inert degradation keeps the plain law at any energy.
  CHECK(bouc_wen_rate(0.8, 0.003, p, 5.0) == doctest::Approx(0.8 - (15.0 * 0.8 * 0.003 + 150.0 * 0.8 * 0.003)).epsilon(1e-14));

  BoucWenParams deg = p;
  deg.dv = 10.0;
  deg.deta = 5.0;
  CHECK(bouc_wen_rate(0.8, 0.003, deg, 0.1) == doctest::Approx((0.8 - 2.0 * (15.0 * 0.8 * 0.003 + 150.0 * 0.8 * 0.003)) / 1.5).epsilon(1e-14));

  BoucWenParams pinch = p;
  pinch.p = 100.0;
  CHECK(std::abs(bouc_wen_rate(0.5, 0.001, pinch, 0.05)) < std::abs(bouc_wen_rate(0.5, 0.001, p, 0.05)));

  BoucWenParams bad = p;
  bad.zeta_s = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("uniform frame") {
  for (std::size_t n : {1u, 3u, 10u}) {
    const auto f = ShearFrame::uniform(n);
    CHECK_NOTHROW(f.validate());
    const auto w = f.natural_frequencies();
    CHECK(2.0 * kPi / w(0) == doctest::Approx(0.1 * static_cast<double>(n)).epsilon(1e-10));
    const Eigen::Index top = std::min<Eigen::Index>(1, w.size() - 1);
    for (Eigen::Index j = 0; j <= top; ++j) {
      CHECK(f.damping.a0 / (2.0 * w(j)) + f.damping.a1 * w(j) / 2.0 == doctest::Approx(0.05).epsilon(1e-10));
    }
  }
  CHECK_THROWS(ShearFrame::uniform(0));
}

TEST_CASE("zero excitation leaves the frame at rest") {
  const auto f = ShearFrame::uniform(3);
  const TimeGrid g = TimeGrid::covering(2.0, 0.02);
  const auto h = simulate(f, GroundMotion{g, std::vector<double>(g.count, 0.0)});
  CHECK(h.displacement.cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.acceleration.cwiseAbs().maxCoeff() == 0.0);
  CHECK(h.grid == g);
  CHECK(h.displacement.rows() == static_cast<Eigen::Index>(g.count));
}

TEST_CASE("single story harmonic steady state") {
  const auto f = linear(ShearFrame::uniform(1, 1000.0, 0.5, 0.05));
  const double w = 2.0 * kPi / 0.5;
  const double big_w = 0.8 * w;
  const double amp = 1.0;
  const auto h = simulate(f, harmonic(amp, big_w, 30.0, 0.005));
  const double expected = amp / std::sqrt(std::pow(w * w - big_w * big_w, 2) + std::pow(2.0 * 0.05 * w * big_w, 2));
  double peak = 0.0;
  for (Eigen::Index i = h.displacement.rows() - 1000; i < h.displacement.rows(); ++i) peak = std::max(peak, std::abs(h.displacement(i, 0)));
  CHECK(std::abs(peak / expected - 1.0) < 0.01);
}

TEST_CASE("ten-story linear frame against modal superposition") {
  const auto f = linear(ShearFrame::uniform(10));
  const auto g = record(3);
  const auto h = simulate(f, g);
  const auto ref = oracle::modal_response(f, g);
  for (Eigen::Index floor : {0, 4, 9}) {
    CAPTURE(floor);
    const Eigen::VectorXd dd = h.displacement.col(floor) - ref.disp.col(floor);
    const Eigen::VectorXd da = h.acceleration.col(floor) - ref.acc.col(floor);
    CHECK(oracle::rms(dd) / oracle::rms(ref.disp.col(floor)) < 0.01);
    CHECK(oracle::rms(da) / oracle::rms(ref.acc.col(floor)) < 0.01);
  }
}

TEST_CASE("step halving changes the nonlinear peak by under half a percent") {
  const auto f = ShearFrame::uniform(3);
  const auto g = scaled(record(8), 3.0);
  SolverConfig fine;
  fine.substeps = 16;
  const double coarse_peak = simulate(f, g).displacement.col(2).cwiseAbs().maxCoeff();
  const double fine_peak = simulate(f, g, fine).displacement.col(2).cwiseAbs().maxCoeff();
  CHECK(std::abs(coarse_peak / fine_peak - 1.0) < 0.005);
}

TEST_CASE("undamped linear frame conserves energy in free vibration") {
  auto f = linear(ShearFrame::uniform(3));
  f.damping = Rayleigh{};
  const TimeGrid grid = TimeGrid::covering(10.0, 0.01);
  GroundMotion g{grid, std::vector<double>(grid.count, 0.0)};
  for (std::size_t i = 0; i < 50; ++i) g.values[i] = std::sin(kPi * grid.at(i) / 0.5);
  const auto h = simulate(f, g);
  const double e1 = mechanical_energy(f, h, 100);
  const double e2 = mechanical_energy(f, h, static_cast<Eigen::Index>(grid.count) - 1);
  CHECK(e1 > 0.0);
  CHECK(std::abs(e2 / e1 - 1.0) < 1e-3);
}

TEST_CASE("amplitude scaling") {
  const auto g = record(5);
  const auto lin = linear(ShearFrame::uniform(3));
  const auto a = simulate(lin, g);
  const auto b = simulate(lin, scaled(g, 2.0));
  CHECK((b.displacement - 2.0 * a.displacement).cwiseAbs().maxCoeff() <= 1e-9 * a.displacement.cwiseAbs().maxCoeff());

  // Softening shows in the force-like response: peak absolute acceleration
  // and hysteretic displacement grow less than the excitation.
  const auto nl = ShearFrame::uniform(3);
  const auto one = simulate(nl, g);
  const auto two = simulate(nl, scaled(g, 2.0));
  CHECK(two.acceleration.cwiseAbs().maxCoeff() < 2.0 * one.acceleration.cwiseAbs().maxCoeff());
  CHECK(two.hysteretic.cwiseAbs().maxCoeff() < 2.0 * one.hysteretic.cwiseAbs().maxCoeff());
}

TEST_CASE("divergence is reported") {
  const auto f = ShearFrame::uniform(2);
  const TimeGrid grid = TimeGrid::covering(1.0, 0.02);
  GroundMotion g{grid, std::vector<double>(grid.count, 1e305)};
  CHECK_THROWS_AS(simulate(f, g), NumericalError);
  GroundMotion bad{grid, std::vector<double>(3, 0.0)};
  CHECK_THROWS_AS(simulate(f, bad), DomainError);
}
