#include <doctest.h>

#include <cmath>
#include <memory>

#include "seisint/envelope.hpp"
#include "seisint/error.hpp"
#include "seisint/interval_process.hpp"
#include "seisint/spectra.hpp"

using namespace seisint;

namespace {

// y(t_i; theta) = a_i + b_i theta_0 (+ c_i theta_1^2 when dim = 2).
class AffineModel : public ResponseModel {
 public:
  AffineModel(Eigen::VectorXd a, Eigen::VectorXd b, std::size_t dim = 1)
      : grid_{0.0, 0.1, static_cast<std::size_t>(a.size())}, a_(std::move(a)), b_(std::move(b)), dim_(dim) {}
  std::size_t dimension() const override { return dim_; }
  const TimeGrid& grid() const override { return grid_; }
  std::size_t channels() const override { return 1; }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& theta) const override {
    Eigen::VectorXd y = a_ + b_ * theta(0);
    if (dim_ > 1) y.array() += 0.5 * theta(1) * theta(1);
    return y;
  }

 private:
  TimeGrid grid_;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  std::size_t dim_;
};

class ZeroModel : public ResponseModel {
 public:
  std::size_t dimension() const override { return 3; }
  const TimeGrid& grid() const override { return grid_; }
  std::size_t channels() const override { return 2; }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd&) const override { return Eigen::MatrixXd::Zero(5, 2); }

 private:
  TimeGrid grid_{0.0, 0.1, 5};
};

AffineModel wavy(std::size_t n, std::size_t dim = 1) {
  Eigen::VectorXd a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(static_cast<Eigen::Index>(i)) = std::sin(0.7 * static_cast<double>(i));
    b(static_cast<Eigen::Index>(i)) = std::cos(0.3 * static_cast<double>(i)) + 0.1;
  }
  return {a, b, dim};
}

std::shared_ptr<const KlBasis> small_basis(std::size_t order) {
  SynthesisOptions so;
  const auto motions = synthesize_ensemble(so, TimeGrid::covering(2.0, 0.05), 10, 21);
  auto p = std::make_shared<IntervalProcess>(construct_mrsip(SampleEnsemble::from_motions(motions)));
  return std::make_shared<KlBasis>(KlBasis(p, 0.99).with_order(order));
}

}  // namespace

TEST_CASE("quantity names") {
  CHECK(quantity_name(Quantity::Velocity) == "vel");
  CHECK(parse_quantity("acc") == Quantity::Acceleration);
  CHECK_THROWS_AS(parse_quantity("jerk"), DomainError);
}

TEST_CASE("single MCS sample") {
  const auto model = wavy(7);
  ResponseCache cache(model);
  const auto env = mcs_envelope(cache, 1, 4);
  REQUIRE(env.size() == 1);
  CHECK(env[0].lower == env[0].upper);
  const Eigen::VectorXd theta = env[0].arg_upper.col(0);
  CHECK(env[0].upper == model.evaluate(theta).col(0));
  CHECK(env[0].simulations == 1);
  CHECK_THROWS_AS(mcs_envelope(cache, 0, 4), DomainError);
}

TEST_CASE("MCS of a linear one-dimensional model tends to the endpoint envelope") {
  const auto model = wavy(15);
  const Eigen::VectorXd lo = model.evaluate(Eigen::VectorXd::Constant(1, -1.0));
  const Eigen::VectorXd hi = model.evaluate(Eigen::VectorXd::Constant(1, 1.0));
  const Eigen::VectorXd exact_lo = lo.cwiseMin(hi);
  const Eigen::VectorXd exact_hi = lo.cwiseMax(hi);
  ResponseCache cache(model, 0);
  const auto env = mcs_envelope(cache, 20000, 1)[0];
  CHECK((env.upper - exact_hi).cwiseAbs().maxCoeff() < 2e-3);
  CHECK((env.lower - exact_lo).cwiseAbs().maxCoeff() < 2e-3);
  CHECK((env.upper.array() <= exact_hi.array() + 1e-12).all());
  CHECK(env.simulations == 20000);

  // Prefix property: more samples never shrink the envelope.
  ResponseCache c2(model, 0);
  const auto fewer = mcs_envelope(c2, 5000, 1)[0];
  CHECK((fewer.upper.array() <= env.upper.array()).all());
  CHECK((fewer.lower.array() >= env.lower.array()).all());
}

TEST_CASE("optimizer envelopes of a linear model hit the endpoints") {
  const auto model = wavy(15);
  const Eigen::VectorXd lo = model.evaluate(Eigen::VectorXd::Constant(1, -1.0));
  const Eigen::VectorXd hi = model.evaluate(Eigen::VectorXd::Constant(1, 1.0));
  const double tol = 1e-9 * std::max(lo.cwiseAbs().maxCoeff(), hi.cwiseAbs().maxCoeff());
  for (bool des : {true, false}) {
    ResponseCache cache(model);
    ExtremumConfig cfg;
    const auto env = des ? des_es_ss(cache, 0, cfg) : cmaes_envelope(cache, 0, cfg);
    CHECK(env.method == (des ? "des-es-ss" : "cmaes"));
    CHECK((env.upper - lo.cwiseMax(hi)).cwiseAbs().maxCoeff() <= tol);
    CHECK((env.lower - lo.cwiseMin(hi)).cwiseAbs().maxCoeff() <= tol);
    CHECK(env.simulations <= env.evaluations);
  }
}

TEST_CASE("constant functional") {
  const ZeroModel model;
  ResponseCache cache(model);
  ExtremumConfig cfg;
  cfg.max_generations = 5;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto env = des_es_ss(cache, c, cfg);
    CHECK(env.lower.cwiseAbs().maxCoeff() == 0.0);
    CHECK(env.upper.cwiseAbs().maxCoeff() == 0.0);
  }
  const auto ex = instant_extremum(cache, 1, 2, Sense::Max, cfg);
  CHECK(ex.value == 0.0);
  CHECK(ex.generations <= 5);
  CHECK_THROWS_AS(instant_extremum(cache, 2, 0, Sense::Max, cfg), DomainError);
  CHECK_THROWS_AS(instant_extremum(cache, 0, 5, Sense::Max, cfg), DomainError);
}

TEST_CASE("a one-instant sweep equals a cold single-instant search") {
  Eigen::VectorXd a(1), b(1);
  a << 0.3;
  b << -2.0;
  const AffineModel model(a, b, 2);
  ExtremumConfig cfg;
  ResponseCache c1(model);
  const auto ex = instant_extremum(c1, 0, 0, Sense::Min, cfg);
  ResponseCache c2(model);
  const auto env = des_es_ss(c2, 0, cfg);
  CHECK(env.lower(0) == ex.value);
  CHECK(env.arg_lower.col(0) == ex.theta);
  CHECK(ex.value < -1.6);
  CHECK(ex.value >= -1.7 - 1e-12);
}

TEST_CASE("reported bounds dominate every evaluated history") {
  const auto model = wavy(12, 2);
  ResponseCache cache(model, 0);
  Eigen::MatrixXd seen(12, 0);
  ExtremumConfig cfg;
  cfg.max_generations = 8;
  const auto env = des_es_ss(cache, 0, cfg);
  // Replay every instant search with the same sources and collect histories.
  SequenceSource src = SequenceSource::des(generate_des(2, EsParams::defaults(2).lambda, cfg.des, cfg.seed).points, cfg.seed + 1);
  std::vector<Eigen::VectorXd> hist;
  const HistoryObserver obs = [&](const Eigen::VectorXd&, const Eigen::MatrixXd& h) { hist.push_back(h.col(0)); };
  for (Sense s : {Sense::Min, Sense::Max}) {
    std::optional<Eigen::VectorXd> warm = Eigen::VectorXd::Zero(2);
    for (std::size_t i = 0; i < 12; ++i) warm = instant_extremum(cache, 0, i, s, cfg, warm, &src, obs).theta;
  }
  seen.resize(12, static_cast<Eigen::Index>(hist.size()));
  for (std::size_t k = 0; k < hist.size(); ++k) seen.col(static_cast<Eigen::Index>(k)) = hist[k];
  CHECK(env.evaluations == hist.size());
  CHECK(envelope_contains(env, seen).all());
  CHECK((env.upper - seen.rowwise().maxCoeff()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((env.lower - seen.rowwise().minCoeff()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("cache does not change results") {
  const auto basis = small_basis(3);
  FrameResponse model(ShearFrame::uniform(2), basis, {{Quantity::Displacement, 1}, {Quantity::Acceleration, 0}});
  CHECK(model.dimension() == 3);
  CHECK(model.channels() == 2);
  ExtremumConfig cfg;
  cfg.max_generations = 4;
  ResponseCache cached(model);
  ResponseCache plain(model, 0);
  const auto a = des_es_ss(cached, 1, cfg);
  const auto b = des_es_ss(plain, 1, cfg);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.evaluations == b.evaluations);
  CHECK(b.simulations == b.evaluations);
  CHECK(a.simulations <= a.evaluations);

  const std::size_t before = cached.simulations();
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 0.1);
  const auto first = cached(theta);
  const auto second = cached(theta);
  CHECK(first == second);
  CHECK(cached.simulations() == before + 1);

  const auto m1 = mcs_envelope(cached, 50, 3);
  const auto m2 = mcs_envelope(plain, 50, 3);
  CHECK(m1[0].upper == m2[0].upper);
  CHECK(m1[1].lower == m2[1].lower);

  // Theta = 0 reproduces the response to the median path.
  const Eigen::MatrixXd h0 = model.evaluate(Eigen::VectorXd::Zero(3));
  const auto median = kl_reconstruct(*basis, Eigen::VectorXd::Zero(3));
  CHECK(h0 == model.respond(median));
}

TEST_CASE("containment checks") {
  EnvelopeResult env;
  env.lower = Eigen::VectorXd::Constant(4, -1.0);
  env.upper = Eigen::VectorXd::Constant(4, 1.0);
  CHECK(envelope_contains(env, Eigen::MatrixXd(4, 0)).all());

  Eigen::MatrixXd h(4, 2);
  h << 0.5, -1.0, 1.0, 0.0, -0.2, 0.9, 0.1, -0.99;
  CHECK(envelope_contains(env, h).all());

  EnvelopeResult tight = env;
  tight.upper = h.rowwise().maxCoeff();
  tight.lower = h.rowwise().minCoeff();
  CHECK(envelope_contains(tight, h).all());
  tight.upper *= 0.99;
  tight.lower *= 0.99;
  const auto r = envelope_contains(tight, h);
  CHECK_FALSE(r.all());
  CHECK(r.violations == 4);
  CHECK(r.worst_excess == doctest::Approx(0.01));

  CHECK_THROWS_AS(envelope_contains(env, Eigen::MatrixXd::Zero(3, 1)), DomainError);
}

TEST_CASE("ten-story maximum at 5 s dominates the training responses") {
  SynthesisOptions so;
  const auto motions = synthesize_ensemble(so, TimeGrid::covering(10.0, 0.05), 20, 2024);
  auto p = std::make_shared<IntervalProcess>(construct_mrsip(SampleEnsemble::from_motions(motions)));
  auto basis = std::make_shared<KlBasis>(kl_decompose(*p, 0.99));
  const FrameResponse model(ShearFrame::uniform(10), basis, {{Quantity::Displacement, 9}});
  const std::size_t instant = 100;
  CHECK(model.grid().at(instant) == doctest::Approx(5.0));
  double training_max = -INFINITY;
  for (const auto& m : motions) training_max = std::max(training_max, model.respond(m)(static_cast<Eigen::Index>(instant), 0));
  ResponseCache cache(model);
  const auto ex = instant_extremum(cache, 0, instant, Sense::Max, ExtremumConfig{});
  CHECK(ex.value >= training_max);
  CHECK(ex.theta.norm() <= 1.0 + 1e-12);
}
