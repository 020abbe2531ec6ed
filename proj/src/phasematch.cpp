#include "spdc/phasematch.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::phasematch {

using dispersion::inverse_group_velocity;
using dispersion::wavenumber_at;

void PumpSpec::validate() const {
  if (!(center_wavelength_nm > 0.0))
    throw Error(ErrorKind::validation, "pump.center_wavelength_nm must be positive");
  if (!(intensity_fwhm_nm > 0.0))
    throw Error(ErrorKind::validation, "pump.intensity_fwhm_nm must be positive");
  if (!(intensity_fwhm_nm < center_wavelength_nm))
    throw Error(ErrorKind::validation,
                "pump.intensity_fwhm_nm must be smaller than pump.center_wavelength_nm");
  if (!(repetition_rate_mhz > 0.0))
    throw Error(ErrorKind::validation, "pump.repetition_rate_mhz must be positive");
  if (pulse_duration_fs && !(*pulse_duration_fs > 0.0))
    throw Error(ErrorKind::validation, "pump.pulse_duration_fs must be positive");
}

void CrystalSpec::validate() const {
  if (!(length_mm > 0.0)) throw Error(ErrorKind::validation, "crystal.length_mm must be positive");
  if (!(poling_period_um > 0.0))
    throw Error(ErrorKind::validation, "crystal.poling_period_um must be positive");
  axes.validate();
}

double CrystalSpec::effective_poling_period_um() const {
  const auto& pump = axes.pump;
  if (!pump.thermal || pump.thermal->poling_expansion == 0.0) return poling_period_um;
  const double dt = temperature_c - pump.reference_temperature_c;
  return poling_period_um * (1.0 + pump.thermal->poling_expansion * dt);
}

CrystalSpec default_crystal() {
  return CrystalSpec{2.0, 46.15, 20.0, dispersion::default_ktp_axes()};
}

double unpoled_mismatch(const dispersion::CrystalAxes& axes, double omega_signal,
                        double omega_idler, double temperature_c) {
  return wavenumber_at(axes.pump, omega_signal + omega_idler, temperature_c) -
         wavenumber_at(axes.signal, omega_signal, temperature_c) -
         wavenumber_at(axes.idler, omega_idler, temperature_c);
}

double phase_mismatch(const CrystalSpec& crystal, double omega_signal, double omega_idler) {
  const double dk = unpoled_mismatch(crystal.axes, omega_signal, omega_idler,
                                     crystal.temperature_c);
  return dk + 2.0 * units::kPi / crystal.effective_poling_period_um();
}

double solve_poling_period(double pump_nm, double signal_nm, double idler_nm,
                           double temperature_c, const dispersion::CrystalAxes& axes) {
  const double imbalance = 1.0 / pump_nm - 1.0 / signal_nm - 1.0 / idler_nm;
  if (!(std::abs(imbalance) <= kEnergyTolerancePerNm)) {
    std::ostringstream os;
    os << "energy conservation violated: 1/" << pump_nm << " - 1/" << signal_nm << " - 1/"
       << idler_nm << " = " << imbalance << " nm^-1";
    throw Error(ErrorKind::input, os.str());
  }
  const double ws = units::omega_from_nm(signal_nm);
  const double wi = units::omega_from_nm(idler_nm);
  const double dk = unpoled_mismatch(axes, ws, wi, temperature_c);
  if (!(dk < 0.0)) {
    std::ostringstream os;
    os << "unpoled mismatch " << dk
       << " rad/um has the wrong sign; no first-order poling period phase matches";
    throw Error(ErrorKind::no_solution, os.str());
  }
  double period = 2.0 * units::kPi / -dk;
  const auto& pump = axes.pump;
  if (pump.thermal && pump.thermal->poling_expansion != 0.0) {
    period /= 1.0 + pump.thermal->poling_expansion * (temperature_c - pump.reference_temperature_c);
  }
  return period;
}

double gvm_angle(double pump_nm, double signal_nm, double idler_nm,
                 const dispersion::CrystalAxes& axes, double temperature_c) {
  const double kp = inverse_group_velocity(axes.pump, pump_nm, temperature_c);
  const double ks = inverse_group_velocity(axes.signal, signal_nm, temperature_c);
  const double ki = inverse_group_velocity(axes.idler, idler_nm, temperature_c);
  const double num = ks - kp;
  const double den = kp - ki;
  const double tiny = 1.0e-9 * std::abs(kp);
  if (std::abs(num) <= tiny && std::abs(den) <= tiny) {
    throw Error(ErrorKind::degenerate_input,
                "k'_s = k'_p = k'_i: phase-matching ridge orientation is undefined");
  }
  double deg = std::atan2(num, den) * 180.0 / units::kPi;
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

double gvm_residual(const dispersion::CrystalAxes& axes, double daughter_nm,
                    double temperature_c) {
  const double kp = inverse_group_velocity(axes.pump, 0.5 * daughter_nm, temperature_c);
  const double ks = inverse_group_velocity(axes.signal, daughter_nm, temperature_c);
  const double ki = inverse_group_velocity(axes.idler, daughter_nm, temperature_c);
  return kp - 0.5 * (ks + ki);
}

double gvm_degenerate_wavelength(const dispersion::CrystalAxes& axes, double temperature_c,
                                 SearchWindow window) {
  constexpr int kScanPoints = 61;
  std::vector<double> xs(kScanPoints), gs(kScanPoints);
  bool all_flat = true;
  for (int n = 0; n < kScanPoints; ++n) {
    xs[n] = window.min_nm + (window.max_nm - window.min_nm) * n / (kScanPoints - 1);
    gs[n] = gvm_residual(axes, xs[n], temperature_c);
    const double scale = inverse_group_velocity(axes.pump, 0.5 * xs[n], temperature_c);
    if (std::abs(gs[n]) > 1.0e-9 * std::abs(scale)) all_flat = false;
  }
  if (all_flat) {
    throw Error(ErrorKind::degenerate_input,
                "group velocities are matched everywhere in the search window; "
                "the GVM wavelength is not unique");
  }
  for (int n = 0; n + 1 < kScanPoints; ++n) {
    if (gs[n] == 0.0) return xs[n];
    if ((gs[n] < 0.0) == (gs[n + 1] < 0.0)) continue;
    double lo = xs[n], hi = xs[n + 1], glo = gs[n];
    while (hi - lo > 1.0e-9) {
      const double mid = 0.5 * (lo + hi);
      const double gm = gvm_residual(axes, mid, temperature_c);
      if (gm == 0.0) return mid;
      if ((gm < 0.0) == (glo < 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  std::ostringstream os;
  os << "no group-velocity-matching wavelength in [" << window.min_nm << ", "
     << window.max_nm << "] nm";
  throw Error(ErrorKind::no_solution, os.str());
}

} // namespace spdc::phasematch
