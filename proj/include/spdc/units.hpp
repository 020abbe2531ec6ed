#pragma once

#include <numbers>

// Spectral quantities are carried internally as angular frequency in rad/fs,
// lengths in µm and times in fs. Everything that crosses the public API in
// wavelength goes through these helpers.
namespace spdc::units {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 0.299792458; // µm/fs

/// Vacuum wavelength in nm -> angular frequency in rad/fs.
constexpr double omega_from_nm(double wavelength_nm) {
  return 2.0 * kPi * kSpeedOfLight * 1.0e3 / wavelength_nm;
}

constexpr double nm_from_omega(double omega) {
  return 2.0 * kPi * kSpeedOfLight * 1.0e3 / omega;
}

constexpr double um_from_nm(double nm) { return nm * 1.0e-3; }

/// Linearized width conversion around `center_nm`: |dω/dλ|·Δλ.
constexpr double omega_width_from_nm(double center_nm, double width_nm) {
  return 2.0 * kPi * kSpeedOfLight * 1.0e3 * width_nm / (center_nm * center_nm);
}

constexpr double nm_width_from_omega(double center_nm, double width_omega) {
  return width_omega * center_nm * center_nm / (2.0 * kPi * kSpeedOfLight * 1.0e3);
}

} // namespace spdc::units
