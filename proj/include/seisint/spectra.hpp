#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "seisint/time_grid.hpp"

namespace seisint {

/// Site and filter parameters of the Kanai-Tajimi / Clough-Penzien spectra.
/// Intensity s0 is in cm^2/s^3, frequencies in rad/s.
struct PsdParams {
  double omega_g = 5.0 * 3.14159265358979323846;
  double zeta_g = 0.6;
  double s0 = 48.933;
  double omega_f = 0.5 * 3.14159265358979323846;
  double zeta_f = 0.6;

  /// Filter tied to the site: omega_f = 0.1 omega_g, zeta_f = zeta_g.
  static PsdParams with_site(double omega_g, double zeta_g, double s0 = 48.933);

  void validate() const;
};

/// Time-frequency modulation A(w, t) of the evolutionary spectrum.
struct ModulationParams {
  double a = 0.05;
  double b = 0.07;
  double c = 0.01;

  /// b = a + 0.02.
  static ModulationParams with_decay(double a, double c);

  void validate() const;
};

enum class SpectrumKind { KanaiTajimi, CloughPenzien };

/// Double-sided spectral densities (cm^2/s^3).
double kanai_tajimi_psd(double omega, const PsdParams& params);
double clough_penzien_psd(double omega, const PsdParams& params);
double psd(SpectrumKind kind, double omega, const PsdParams& params);

/// Instant of peak modulation: t* = (ln(c w + b) - ln a) / (c w + b - a).
double peak_time(double omega, const ModulationParams& params);

/// A(w, t) in [0, 1]; zero at t = 0 and one at t = t*(w).
double modulation(double omega, double t, const ModulationParams& params);

/// |A(w, t)|^2 * S_CP(w).
double epsd(double omega, double t, const PsdParams& psd, const ModulationParams& mod);

/// Integral of the double-sided spectrum over [-omega_max, omega_max]
/// (omega_max = +inf for the full variance).
double spectral_variance(SpectrumKind kind, const PsdParams& params, double omega_max);

/// Smallest cutoff w_c with int_0^{w_c} S >= fraction * int_0^inf S.
double energy_cutoff(SpectrumKind kind, const PsdParams& params, double fraction = 0.99);

struct GroundMotion {
  TimeGrid grid;
  std::vector<double> values;  // m/s^2
};

struct SynthesisOptions {
  SpectrumKind kind = SpectrumKind::CloughPenzien;
  PsdParams psd;
  std::optional<ModulationParams> modulation;
  /// Number of harmonic components; must be >= 64.
  std::size_t frequency_count = 2048;
  /// Upper frequency (rad/s). When unset the 99% energy cutoff is used; when
  /// set it must cover at least that much energy.
  std::optional<double> cutoff;
  double energy_fraction = 0.99;
};

/// Spectral representation: sum_k 2 sqrt(S(w_k) dw) A(w_k, t) cos(w_k t + phi_k)
/// with independent uniform phases. Output converted from cm/s^2 to m/s^2.
GroundMotion synthesize_accelerogram(const SynthesisOptions& options, const TimeGrid& grid,
                                     std::uint64_t seed);

/// `count` independent accelerograms drawn from one seeded stream.
std::vector<GroundMotion> synthesize_ensemble(const SynthesisOptions& options,
                                              const TimeGrid& grid, std::size_t count,
                                              std::uint64_t seed);

}  // namespace seisint
