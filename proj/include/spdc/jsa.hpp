#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc/phasematch.hpp"

namespace spdc::jsa {

using phasematch::CrystalSpec;
using phasematch::PumpSpec;

enum class Arm { signal, idler };

/// Square sampling of the (ω_s, ω_i) plane. Each axis runs uniformly in
/// angular frequency from ω(center + half_span) to ω(center - half_span).
struct FrequencyGrid {
  double center_signal_nm = 1570.0;
  double center_idler_nm = 1570.0;
  double half_span_nm = 60.0;
  int points_per_axis = 512;

  void validate() const;
  std::vector<double> signal_omegas() const;
  std::vector<double> idler_omegas() const;
  double signal_step() const;
  double idler_step() const;

  bool operator==(const FrequencyGrid&) const = default;
};

enum class FilterShape { gaussian, rectangular };

/// Band-pass filter, specified by its intensity transmission in wavelength.
struct FilterSpec {
  double center_nm = 1570.0;
  double fwhm_nm = 8.0;
  FilterShape shape = FilterShape::gaussian;
  double peak_transmission = 1.0;

  void validate() const;
  double transmission(double wavelength_nm) const;

  bool operator==(const FilterSpec&) const = default;
};

/// Transmitted fraction of |f|² for filters applied so far. `signal_arm` and
/// `idler_arm` are what each arm's filter alone would pass; `joint` is the
/// fraction with both in place.
struct FilterLoss {
  double joint = 1.0;
  double signal_arm = 1.0;
  double idler_arm = 1.0;

  /// Survival of the `arm` photon given that its partner made it through.
  double conditional(Arm arm) const;
};

struct JointAmplitude {
  FrequencyGrid grid;
  Eigen::MatrixXcd amplitudes; // rows: signal, columns: idler
  bool normalized = false;
  FilterLoss filter_loss;

  /// Σ|f|² Δω_s Δω_i.
  double norm_integral() const;
};

/// Wraps a raw matrix on `grid` and normalizes it.
JointAmplitude make_joint_amplitude(const FrequencyGrid& grid, Eigen::MatrixXcd amplitudes);

struct SchmidtSpectrum {
  std::vector<double> coefficients; // descending, sum 1
  double purity = 1.0;
  double schmidt_number = 1.0;
};

struct MarginalSpectrum {
  std::vector<double> wavelength_nm; // ascending
  std::vector<double> probability;   // per grid cell, sums to 1
  double fwhm_nm = 0.0;
};

/// Amplitude 1/e half-width σ_p (rad/fs) of the pump envelope. The intensity
/// FWHM in nm is converted to rad/fs at the pump centre, then
/// σ_p = Δω_FWHM / sqrt(2 ln 2) so that |α|² = exp(-2 δ²/σ_p²) halves at δ = Δω_FWHM/2.
double pump_sigma(const PumpSpec& pump);

/// exp[-(ω_s + ω_i - ω_p)² / σ_p²].
double pump_envelope(double omega_signal, double omega_idler, const PumpSpec& pump);

/// sinc(LΔK/2)·exp(-iLΔK/2).
std::complex<double> phasematching_function(double omega_signal, double omega_idler,
                                            const CrystalSpec& crystal);

/// Phase-matching function sampled on `grid`; reusable across pump settings.
Eigen::MatrixXcd phasematching_matrix(const CrystalSpec& crystal, const FrequencyGrid& grid);

JointAmplitude compute_jsa(const PumpSpec& pump, const CrystalSpec& crystal,
                           const FrequencyGrid& grid);

/// Zeroes everything outside the central phase-matching lobe |LΔK/2| < π.
JointAmplitude central_lobe(const JointAmplitude& jsa, const CrystalSpec& crystal);

JointAmplitude apply_filter(const JointAmplitude& jsa,
                            const std::optional<FilterSpec>& signal_filter,
                            const std::optional<FilterSpec>& idler_filter);

SchmidtSpectrum schmidt_decompose(const JointAmplitude& jsa);

MarginalSpectrum marginal_spectrum(const JointAmplitude& jsa, Arm arm);

/// Width between the outermost crossings of `fraction`·peak, interpolated.
double support_width_nm(const MarginalSpectrum& spectrum, double fraction);

struct BandwidthOptimum {
  double best_fwhm_nm = 0.0;
  double best_purity = 0.0;
  std::vector<std::pair<double, double>> trace; // (fwhm_nm, purity) in evaluation order
};

struct BandwidthWindow {
  double min_nm;
  double max_nm;
};

/// Golden-section maximization of the unfiltered Schmidt purity over the
/// pump intensity FWHM. A coarse scan first confirms an interior maximum.
BandwidthOptimum optimize_pump_bandwidth(const CrystalSpec& crystal, double pump_center_nm,
                                         BandwidthWindow window, const FrequencyGrid& grid,
                                         double tolerance_nm = 0.01);

} // namespace spdc::jsa
