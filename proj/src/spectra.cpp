#include "seisint/spectra.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "seisint/error.hpp"

namespace seisint {

namespace {

constexpr double kCmToM = 0.01;

double integrate_one_sided(SpectrumKind kind, const PsdParams& params, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double w) { return psd(kind, w, params); };
  return gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12);
}

}  // namespace

TimeGrid TimeGrid::covering(double duration, double step) {
  if (!(step > 0.0) || !(duration >= 0.0) || !std::isfinite(duration) || !std::isfinite(step)) {
    throw DomainError("time grid needs a positive step and non-negative duration");
  }
  TimeGrid grid;
  grid.step = step;
  grid.count = static_cast<std::size_t>(std::llround(duration / step)) + 1;
  return grid;
}

std::vector<double> TimeGrid::instants() const {
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = at(i);
  return t;
}

void TimeGrid::validate() const {
  if (count == 0) throw DomainError("time grid is empty");
  if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(start)) {
    throw DomainError("time grid step must be positive and finite");
  }
}

PsdParams PsdParams::with_site(double omega_g, double zeta_g, double s0) {
  return PsdParams{omega_g, zeta_g, s0, 0.1 * omega_g, zeta_g};
}

void PsdParams::validate() const {
  if (!(omega_g > 0.0)) throw DomainError("omega_g must be positive");
  if (!(zeta_g > 0.0 && zeta_g < 1.0)) throw DomainError("zeta_g must lie in (0, 1)");
  if (!(s0 >= 0.0)) throw DomainError("s0 must be non-negative");
  if (!(omega_f > 0.0)) throw DomainError("omega_f must be positive");
  if (!(zeta_f > 0.0)) throw DomainError("zeta_f must be positive");
}

ModulationParams ModulationParams::with_decay(double a, double c) { return {a, a + 0.02, c}; }

void ModulationParams::validate() const {
  if (!(a > 0.0)) throw DomainError("modulation decay rate a must be positive");
  if (!(b > a)) throw DomainError("modulation requires b > a so that c*w + b > a for w >= 0");
  if (!(c >= 0.0)) throw DomainError("modulation coupling c must be non-negative");
}

double kanai_tajimi_psd(double omega, const PsdParams& p) {
  const double wg2 = p.omega_g * p.omega_g;
  const double w2 = omega * omega;
  const double damp = 4.0 * p.zeta_g * p.zeta_g * wg2 * w2;
  const double num = wg2 * wg2 + damp;
  const double den = (w2 - wg2) * (w2 - wg2) + damp;
  return num / den * p.s0;
}

double clough_penzien_psd(double omega, const PsdParams& p) {
  const double wf2 = p.omega_f * p.omega_f;
  const double w2 = omega * omega;
  const double high_pass =
      w2 * w2 / ((w2 - wf2) * (w2 - wf2) + 4.0 * p.zeta_f * p.zeta_f * wf2 * w2);
  if (w2 == 0.0) return 0.0;
  return high_pass * kanai_tajimi_psd(omega, p);
}

double psd(SpectrumKind kind, double omega, const PsdParams& params) {
  return kind == SpectrumKind::KanaiTajimi ? kanai_tajimi_psd(omega, params)
                                           : clough_penzien_psd(omega, params);
}

double peak_time(double omega, const ModulationParams& p) {
  const double r = p.c * omega + p.b;
  if (!(r > p.a)) {
    throw DomainError("modulation undefined: c*w + b = " + std::to_string(r) +
                      " does not exceed a = " + std::to_string(p.a));
  }
  return std::log1p((r - p.a) / p.a) / (r - p.a);
}

double modulation(double omega, double t, const ModulationParams& p) {
  if (!(t >= 0.0)) throw DomainError("modulation needs t >= 0");
  const double t_star = peak_time(omega, p);
  const double gap = p.c * omega + p.b - p.a;
  // e^{-at} - e^{-rt} = e^{-at} (1 - e^{-(r-a)t}), written with expm1 for small gaps.
  return std::exp(-p.a * (t - t_star)) * std::expm1(-gap * t) / std::expm1(-gap * t_star);
}

double epsd(double omega, double t, const PsdParams& psd_params, const ModulationParams& mod) {
  const double amp = modulation(omega, t, mod);
  return amp * amp * clough_penzien_psd(omega, psd_params);
}

double spectral_variance(SpectrumKind kind, const PsdParams& params, double omega_max) {
  const double hi = std::isfinite(omega_max) ? omega_max : std::numeric_limits<double>::infinity();
  return 2.0 * integrate_one_sided(kind, params, 0.0, hi);
}

double energy_cutoff(SpectrumKind kind, const PsdParams& params, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DomainError("energy fraction must lie in (0, 1)");
  const double total = integrate_one_sided(kind, params, 0.0, std::numeric_limits<double>::infinity());
  if (total == 0.0) return params.omega_g;
  const double target = fraction * total;
  double lo = 0.0;
  double hi = params.omega_g;
  while (integrate_one_sided(kind, params, 0.0, hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 80 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (integrate_one_sided(kind, params, 0.0, mid) < target) lo = mid; else hi = mid;
  }
  return hi;
}

std::vector<GroundMotion> synthesize_ensemble(const SynthesisOptions& options,
                                              const TimeGrid& grid, std::size_t count,
                                              std::uint64_t seed) {
  grid.validate();
  options.psd.validate();
  if (options.modulation) options.modulation->validate();
  if (options.frequency_count < 64) throw DomainError("synthesis needs at least 64 frequencies");

  double cutoff = 0.0;
  if (options.cutoff) {
    cutoff = *options.cutoff;
    if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw DomainError("cutoff frequency must be positive");
    const double total = spectral_variance(options.kind, options.psd, std::numeric_limits<double>::infinity());
    const double covered = spectral_variance(options.kind, options.psd, cutoff);
    if (total > 0.0 && covered < options.energy_fraction * total * (1.0 - 1e-9)) {
      throw DomainError("cutoff " + std::to_string(cutoff) + " rad/s covers only " +
                        std::to_string(covered / total) + " of the spectral energy");
    }
  } else {
    cutoff = energy_cutoff(options.kind, options.psd, options.energy_fraction);
  }

  const std::size_t k_count = options.frequency_count;
  const double dw = cutoff / static_cast<double>(k_count);
  std::vector<double> omega(k_count);
  std::vector<double> amplitude(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    omega[k] = (static_cast<double>(k) + 0.5) * dw;
    // Double-sided density: each harmonic carries 2 S(w) dw of variance.
    amplitude[k] = 2.0 * std::sqrt(psd(options.kind, omega[k], options.psd) * dw);
  }

  // Modulation depends only on (w_k, t_i); tabulate once for the whole ensemble.
  std::vector<double> envelope;
  if (options.modulation) {
    envelope.resize(k_count * grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
      for (std::size_t k = 0; k < k_count; ++k) {
        envelope[i * k_count + k] = modulation(omega[k], grid.at(i), *options.modulation);
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  std::vector<GroundMotion> out;
  out.reserve(count);
  std::vector<double> phase(k_count);
  for (std::size_t s = 0; s < count; ++s) {
    for (auto& ph : phase) ph = phase_dist(rng);
    GroundMotion gm{grid, std::vector<double>(grid.count, 0.0)};
    for (std::size_t i = 0; i < grid.count; ++i) {
      const double t = grid.at(i);
      double acc = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        if (amplitude[k] == 0.0) continue;
        double term = amplitude[k] * std::cos(omega[k] * t + phase[k]);
        if (!envelope.empty()) term *= envelope[i * k_count + k];
        acc += term;
      }
      gm.values[i] = acc * kCmToM;
    }
    out.push_back(std::move(gm));
  }
  return out;
}

GroundMotion synthesize_accelerogram(const SynthesisOptions& options, const TimeGrid& grid,
                                     std::uint64_t seed) {
  return synthesize_ensemble(options, grid, 1, seed).front();
}

}  // namespace seisint
