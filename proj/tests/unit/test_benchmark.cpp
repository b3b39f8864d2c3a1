#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seisint/benchmark.hpp"
#include "seisint/error.hpp"

using namespace seisint;

TEST_CASE("optimum value at the shift") {
  for (int id = 1; id <= kBenchmarkCount; ++id) {
    CAPTURE(id);
    CHECK(benchmark_base(id, Eigen::VectorXd::Zero(10)) == doctest::Approx(0.0).epsilon(1e-12));
    for (bool rotate : {true, false}) {
      const auto f = make_benchmark(id, 10, 7, standard_bias(id), rotate);
      CHECK(f(f.shift) == doctest::Approx(standard_bias(id)).epsilon(1e-12));
      CHECK(f(f.shift + Eigen::VectorXd::Constant(10, 1.0)) > standard_bias(id));
      CHECK(f.shift.cwiseAbs().maxCoeff() <= 80.0);
    }
  }
  CHECK_THROWS(benchmark_base(11, Eigen::VectorXd::Zero(2)));
}

TEST_CASE("base function values") {
  Eigen::VectorXd z(2);
  z << 1.0, 1.0;
  CHECK(benchmark_base(1, z) == doctest::Approx(1.0 + 1e6));
  z << 1.0, 2.0;
  CHECK(benchmark_base(2, z) == doctest::Approx(5.0 + 6.25 + 39.0625));
  z << 100.0 / 5.12, 0.0;
  CHECK(benchmark_base(4, z) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotations are orthogonal and seeded") {
  const auto f = make_benchmark(3, 30, 11, 400.0);
  CHECK((f.rotation.transpose() * f.rotation - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-10);
  const auto g = make_benchmark(3, 30, 11, 400.0);
  CHECK(f.shift == g.shift);
  CHECK(f.rotation == g.rotation);
  CHECK(make_benchmark(3, 30, 12, 400.0).shift != f.shift);
  CHECK(make_benchmark(3, 30, 11, 400.0, false).rotation == Eigen::MatrixXd::Identity(30, 30));
}

TEST_CASE("relative error") {
  CHECK(relative_error(105.0, 100.0) == doctest::Approx(0.05));
  CHECK(relative_error(0.3, 0.0) == doctest::Approx(0.3));
  CHECK(relative_error(-0.5, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("trial bookkeeping") {
  TrialConfig cfg;
  cfg.tolerance = 1e10;
  cfg.seeds = {1, 2, 3};
  for (auto v : {EsVariant::Random, EsVariant::Des}) {
    const auto r = convergence_trial(v, 1, cfg);
    REQUIRE(r.iterations.size() == 3);
    for (const auto& it : r.iterations) CHECK(it == std::size_t{1});
    CHECK(r.median() == 1.0);
  }
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(convergence_trial(EsVariant::Des, 1, cfg), DomainError);

  TrialResult t;
  t.iterations = {std::size_t{3}, std::nullopt, std::size_t{5}};
  CHECK(t.median() == 5.0);
  t.iterations = {std::size_t{3}, std::nullopt, std::nullopt, std::size_t{4}};
  CHECK_FALSE(t.median().has_value());
  t.iterations = {std::size_t{3}, std::size_t{4}, std::nullopt, std::size_t{8}};
  CHECK(t.median() == 6.0);
}

TEST_CASE("optimizer recovers the shifted optimum") {
  const auto f = make_benchmark(1, 10, 3, 100.0);
  MinimizeConfig mc;
  mc.variant = EsVariant::Des;
  mc.max_iters = 3000;
  mc.target = 100.0 + 1e-10;
  const Box box{Eigen::VectorXd::Constant(10, -100.0), Eigen::VectorXd::Constant(10, 100.0)};
  const auto r = minimize([&](const Eigen::VectorXd& x) { return f(x); }, box, mc);
  CHECK(r.converged);
  CHECK((r.best_x - f.shift).norm() < 1e-4);
}

TEST_CASE("DES variates do not slow Rastrigin down") {
  TrialConfig cfg;
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  const auto des = convergence_trial(EsVariant::Des, 4, cfg).median();
  const auto rnd = convergence_trial(EsVariant::Random, 4, cfg).median();
  REQUIRE(des.has_value());
  CHECK((!rnd || *des <= *rnd));
}

TEST_CASE("table layout") {
  CHECK(table_report({}, {}) == "function\n");
  const std::string one = table_report({{10, 0.05}}, {{1, {{12.0, std::nullopt}}}});
  CHECK(one == "function,cmaes_d10_tol0.05,deses_d10_tol0.05\n\"Bent Cigar\",12,-\n");

  std::vector<TableColumn> cols;
  for (std::size_t d : {10u, 30u, 50u}) {
    for (double t : {0.05, 0.01}) cols.push_back({d, t});
  }
  std::vector<TableRow> rows;
  for (int id = 1; id <= 10; ++id) rows.push_back({id, std::vector<std::pair<std::optional<double>, std::optional<double>>>(6, {1.0, 2.0})});
  std::istringstream in(table_report(cols, rows));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') == 12);
  }
  CHECK(lines == 11);
}
