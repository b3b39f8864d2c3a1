#include "seisint/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Vec = Eigen::VectorXd;

double bent_cigar(const Vec& z) { return z(0) * z(0) + 1e6 * z.tail(z.size() - 1).squaredNorm(); }

double zakharov(const Vec& z) {
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s2 += 0.5 * static_cast<double>(i + 1) * z(i);
  const double s2sq = s2 * s2;
  return z.squaredNorm() + s2sq + s2sq * s2sq;
}

double rosenbrock(const Vec& x) {
  const Vec z = x * (2.048 / 100.0) + Vec::Ones(x.size());
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < z.size(); ++i) {
    const double a = z(i) * z(i) - z(i + 1);
    const double b = z(i) - 1.0;
    f += 100.0 * a * a + b * b;
  }
  return f;
}

double rastrigin_raw(const Vec& z) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) f += z(i) * z(i) - 10.0 * std::cos(2.0 * kPi * z(i)) + 10.0;
  return f;
}

double rastrigin(const Vec& x) { return rastrigin_raw(x * (5.12 / 100.0)); }

double schaffer_f6_pair(double a, double b) {
  const double r2 = a * a + b * b;
  const double s = std::sin(std::sqrt(r2));
  const double den = 1.0 + 0.001 * r2;
  return 0.5 + (s * s - 0.5) / (den * den);
}

double expanded_schaffer_f6(const Vec& z) {
  const Eigen::Index n = z.size();
  if (n == 1) return schaffer_f6_pair(z(0), z(0)) - schaffer_f6_pair(0.0, 0.0);
  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) f += schaffer_f6_pair(z(i), z((i + 1) % n));
  return f;
}

double lunacek(const Vec& x) {
  const double n = static_cast<double>(x.size());
  const double mu0 = 2.5;
  const double d = 1.0;
  const double s = 1.0 - 1.0 / (2.0 * std::sqrt(n + 20.0) - 8.2);
  const double mu1 = -std::sqrt((mu0 * mu0 - d) / s);
  const Vec u = 2.0 * (x * (10.0 / 100.0));
  double near = 0.0;
  double far = 0.0;
  double cosines = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    near += u(i) * u(i);
    const double t = u(i) + mu0 - mu1;
    far += t * t;
    cosines += std::cos(2.0 * kPi * u(i));
  }
  return std::min(near, d * n + s * far) + 10.0 * (n - cosines);
}

double noncontinuous_rastrigin(const Vec& x) {
  Vec z = x * (5.12 / 100.0);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) > 0.5) z(i) = std::round(2.0 * z(i)) / 2.0;
  }
  return rastrigin_raw(z);
}

double levy(const Vec& z) {
  const Eigen::Index n = z.size();
  auto w = [&](Eigen::Index i) { return 1.0 + z(i) / 4.0; };
  const double s0 = std::sin(kPi * w(0));
  double f = s0 * s0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double wi = w(i);
    const double s = std::sin(kPi * wi + 1.0);
    f += (wi - 1.0) * (wi - 1.0) * (1.0 + 10.0 * s * s);
  }
  const double wn = w(n - 1);
  const double sn = std::sin(2.0 * kPi * wn);
  f += (wn - 1.0) * (wn - 1.0) * (1.0 + sn * sn);
  return f;
}

double katsuura(const Vec& x) {
  const Vec z = x * (5.0 / 100.0);
  const double n = static_cast<double>(z.size());
  const double expo = 10.0 / std::pow(n, 1.2);
  double prod = 1.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double sum = 0.0;
    for (int j = 1; j <= 32; ++j) {
      const double scaled = std::ldexp(z(i), j);
      sum += std::abs(scaled - std::round(scaled)) / std::ldexp(1.0, j);
    }
    prod *= std::pow(1.0 + static_cast<double>(i + 1) * sum, expo);
  }
  return 10.0 / (n * n) * (prod - 1.0);
}

double ackley(const Vec& z) {
  const double n = static_cast<double>(z.size());
  double cosines = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) cosines += std::cos(2.0 * kPi * z(i));
  return -20.0 * std::exp(-0.2 * std::sqrt(z.squaredNorm() / n)) - std::exp(cosines / n) + 20.0 + std::exp(1.0);
}

double schaffer_f7(const Vec& z) {
  const Eigen::Index n = z.size();
  if (n == 1) {
    const double s = std::abs(z(0));
    const double t = std::sin(50.0 * std::pow(s, 0.2));
    const double v = std::sqrt(s) * (1.0 + t * t);
    return v * v;
  }
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double s = std::sqrt(z(i) * z(i) + z(i + 1) * z(i + 1));
    const double t = std::sin(50.0 * std::pow(s, 0.2));
    f += std::sqrt(s) * (1.0 + t * t);
  }
  f /= static_cast<double>(n - 1);
  return f * f;
}

double schwefel_raw(const Vec& x) {
  constexpr double offset = 4.209687462275036e+002;
  const Eigen::Index n = x.size();
  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = x(i) * (1000.0 / 100.0) + offset;
    if (z > 500.0) {
      const double m = 500.0 - std::fmod(z, 500.0);
      f -= m * std::sin(std::sqrt(m)) - (z - 500.0) * (z - 500.0) / (10000.0 * static_cast<double>(n));
    } else if (z < -500.0) {
      const double m = std::fmod(std::abs(z), 500.0) - 500.0;
      f -= m * std::sin(std::sqrt(std::abs(m))) - (z + 500.0) * (z + 500.0) / (10000.0 * static_cast<double>(n));
    } else {
      f -= z * std::sin(std::sqrt(std::abs(z)));
    }
  }
  return f + 4.189828872724338e+002 * static_cast<double>(n);
}

double modified_schwefel(const Vec& x) { return schwefel_raw(x) - schwefel_raw(Vec::Zero(x.size())); }

using Component = double (*)(const Vec&);

double hybrid(const Vec& z, const std::vector<Component>& parts) {
  const auto blocks = static_cast<Eigen::Index>(parts.size());
  const Eigen::Index n = z.size();
  if (n < blocks) throw DomainError("hybrid function needs at least one coordinate per component");
  const Eigen::Index size = n / blocks;
  double f = 0.0;
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index begin = b * size;
    const Eigen::Index len = b + 1 == blocks ? n - begin : size;
    f += parts[static_cast<std::size_t>(b)](z.segment(begin, len));
  }
  return f;
}

void check_id(int id) {
  if (id < 1 || id > kBenchmarkCount) throw DomainError("benchmark id must be in 1..10");
}

}  // namespace

std::string benchmark_name(int id) {
  check_id(id);
  static const char* names[] = {"Bent Cigar",
                                "Zakharov",
                                "Rosenbrock",
                                "Rastrigin",
                                "Expanded Schaffer F6",
                                "Lunacek bi-Rastrigin",
                                "Non-continuous Rastrigin",
                                "Levy",
                                "Hybrid Zakharov/Rosenbrock/Rastrigin",
                                "Hybrid Katsuura/Ackley/Rastrigin/Schaffer F7/Schwefel"};
  return names[id - 1];
}

double standard_bias(int id) {
  check_id(id);
  static const double biases[] = {100, 300, 400, 500, 600, 700, 800, 900, 1100, 2000};
  return biases[id - 1];
}

double benchmark_base(int id, const Eigen::VectorXd& z) {
  check_id(id);
  if (z.size() < 1) throw DomainError("benchmark input must be non-empty");
  switch (id) {
    case 1: return z.size() == 1 ? z(0) * z(0) : bent_cigar(z);
    case 2: return zakharov(z);
    case 3: return rosenbrock(z);
    case 4: return rastrigin(z);
    case 5: return expanded_schaffer_f6(z);
    case 6: return lunacek(z);
    case 7: return noncontinuous_rastrigin(z);
    case 8: return levy(z);
    case 9: return hybrid(z, {zakharov, rosenbrock, rastrigin});
    default: return hybrid(z, {katsuura, ackley, rastrigin, schaffer_f7, modified_schwefel});
  }
}

double BenchmarkFunction::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != shift.size()) throw DomainError("benchmark input dimension mismatch");
  return benchmark_base(id, rotation * (x - shift)) + bias;
}

BenchmarkFunction make_benchmark(int id, std::size_t dim, std::uint64_t seed, double bias, bool rotate) {
  check_id(id);
  if (dim < 1) throw DomainError("benchmark dimension must be positive");
  if (id >= 9 && dim < (id == 9 ? 3u : 5u)) throw DomainError("hybrid function dimension too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-80.0, 80.0);
  std::normal_distribution<double> g;
  const auto n = static_cast<Eigen::Index>(dim);
  BenchmarkFunction f;
  f.id = id;
  f.bias = bias;
  f.shift.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) f.shift(i) = u(rng);
  if (rotate) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) = g(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    // Fix column signs so the factor is unique.
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    f.rotation = q;
  } else {
    f.rotation = Eigen::MatrixXd::Identity(n, n);
  }
  return f;
}

double relative_error(double f, double optimum) { return std::abs(f - optimum) / std::max(std::abs(optimum), 1.0); }

std::optional<double> TrialResult::median() const {
  if (iterations.empty()) return std::nullopt;
  std::vector<double> v;
  v.reserve(iterations.size());
  for (const auto& it : iterations) {
    v.push_back(it ? static_cast<double>(*it) : std::numeric_limits<double>::infinity());
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double med = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (!std::isfinite(med)) return std::nullopt;
  return med;
}

TrialResult convergence_trial(EsVariant variant, int function_id, const TrialConfig& config) {
  if (!(config.tolerance > 0.0)) throw DomainError("tolerance must be positive");
  TrialResult out;
  out.function_id = function_id;
  out.variant = variant;
  const auto n = static_cast<Eigen::Index>(config.dim);
  const Box box{Eigen::VectorXd::Constant(n, -100.0), Eigen::VectorXd::Constant(n, 100.0)};
  for (std::uint64_t seed : config.seeds) {
    const double bias = config.standard_bias ? standard_bias(function_id) : 0.0;
    const BenchmarkFunction f = make_benchmark(function_id, config.dim, seed, bias);
    MinimizeConfig mc;
    mc.variant = variant;
    mc.max_iters = config.max_iters;
    mc.seed = seed ^ 0x9e3779b97f4a7c15ULL;
    // Largest value still satisfying e < tolerance.
    mc.target = std::nextafter(bias + config.tolerance * std::max(std::abs(bias), 1.0), -INFINITY);
    const MinimizeResult r = minimize([&](const Eigen::VectorXd& x) { return f(x); }, box, mc);
    if (r.converged) {
      out.iterations.emplace_back(r.generations);
    } else {
      out.iterations.emplace_back(std::nullopt);
    }
  }
  return out;
}

std::string table_report(const std::vector<TableColumn>& columns, const std::vector<TableRow>& rows) {
  std::ostringstream os;
  os << "function";
  for (const auto& c : columns) {
    os << ",cmaes_d" << c.dim << "_tol" << c.tolerance << ",deses_d" << c.dim << "_tol" << c.tolerance;
  }
  os << '\n';
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    std::ostringstream s;
    s << *v;
    return s.str();
  };
  for (const auto& r : rows) {
    os << '"' << benchmark_name(r.function_id) << '"';
    for (const auto& m : r.medians) os << ',' << cell(m.first) << ',' << cell(m.second);
    os << '\n';
  }
  return os.str();
}

}  // namespace seisint
