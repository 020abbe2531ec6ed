#pragma once

#include <optional>

#include "spdc/dispersion.hpp"

namespace spdc::phasematch {

struct PumpSpec {
  double center_wavelength_nm = 785.0;
  double intensity_fwhm_nm = 5.35;
  double repetition_rate_mhz = 81.0;
  std::optional<double> pulse_duration_fs;

  void validate() const;
  bool operator==(const PumpSpec&) const = default;
};

struct CrystalSpec {
  double length_mm = 2.0;
  double poling_period_um = 46.15;
  double temperature_c = 20.0;
  dispersion::CrystalAxes axes;

  void validate() const;
  double length_um() const { return length_mm * 1.0e3; }
  /// Poling period at `temperature_c`, expanded with the pump-axis thermal model.
  double effective_poling_period_um() const;

  bool operator==(const CrystalSpec&) const = default;
};

/// The shipped design: 2 mm KTP, 46.15 µm period, 20 °C, default KTP axes.
CrystalSpec default_crystal();

/// ΔK = k_p(ω_s+ω_i) - k_s(ω_s) - k_i(ω_i) + 2π/Λ(T) in rad/µm.
///
/// For this type-II KTP geometry the unpoled mismatch is negative, so the
/// first-order grating vector enters with a plus sign.
double phase_mismatch(const CrystalSpec& crystal, double omega_signal, double omega_idler);

/// k_p - k_s - k_i without the grating term, evaluated at ω_p = ω_s + ω_i.
double unpoled_mismatch(const dispersion::CrystalAxes& axes, double omega_signal,
                        double omega_idler, double temperature_c);

inline constexpr double kEnergyTolerancePerNm = 1.0e-9;

/// Room-temperature poling period (µm) phase matching the given triple.
double solve_poling_period(double pump_nm, double signal_nm, double idler_nm,
                           double temperature_c, const dispersion::CrystalAxes& axes);

/// Orientation of the phase-matching ridge in the (ω_s, ω_i) plane:
/// atan2(k'_s - k'_p, k'_p - k'_i) in degrees, range (-180, 180].
double gvm_angle(double pump_nm, double signal_nm, double idler_nm,
                 const dispersion::CrystalAxes& axes, double temperature_c);

struct SearchWindow {
  double min_nm;
  double max_nm;
};

inline constexpr SearchWindow kGvmSearchWindow{1400.0, 1700.0};

/// Degenerate daughter wavelength λ at which k'_p(λ/2) = (k'_s(λ) + k'_i(λ))/2.
double gvm_degenerate_wavelength(const dispersion::CrystalAxes& axes, double temperature_c,
                                 SearchWindow window = kGvmSearchWindow);

/// k'_p(λ/2) - (k'_s(λ) + k'_i(λ))/2 in fs/µm.
double gvm_residual(const dispersion::CrystalAxes& axes, double daughter_nm,
                    double temperature_c);

} // namespace spdc::phasematch
