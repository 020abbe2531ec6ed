#include "spdc/jsa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::jsa {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> axis_omegas(double center_nm, double half_span_nm, int n) {
  const double lo = units::omega_from_nm(center_nm + half_span_nm);
  const double hi = units::omega_from_nm(center_nm - half_span_nm);
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = lo + (hi - lo) * k / (n - 1);
  return out;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

void require_axis_in_range(const dispersion::SellmeierSet& set, double lo_nm, double hi_nm,
                           const char* what) {
  if (!set.valid_range.contains(lo_nm) || !set.valid_range.contains(hi_nm)) {
    std::ostringstream os;
    os << what << " axis [" << lo_nm << ", " << hi_nm << "] nm leaves the valid range of '"
       << set.name << "' [" << set.valid_range.min_nm << ", " << set.valid_range.max_nm
       << "] nm";
    throw Error(ErrorKind::range, os.str());
  }
}

void require_grid_in_range(const CrystalSpec& crystal, const FrequencyGrid& grid) {
  const auto ws = grid.signal_omegas();
  const auto wi = grid.idler_omegas();
  using units::nm_from_omega;
  require_axis_in_range(crystal.axes.signal, nm_from_omega(ws.back()), nm_from_omega(ws.front()),
                        "signal");
  require_axis_in_range(crystal.axes.idler, nm_from_omega(wi.back()), nm_from_omega(wi.front()),
                        "idler");
  require_axis_in_range(crystal.axes.pump, nm_from_omega(ws.back() + wi.back()),
                        nm_from_omega(ws.front() + wi.front()), "pump (ω_s + ω_i)");
}

double sum_abs2(const Eigen::MatrixXcd& m) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::norm(m(i, j));
  return acc;
}

void normalize_in_place(JointAmplitude& jsa) {
  const double integral = jsa.norm_integral();
  if (!(integral > 0.0)) {
    throw Error(ErrorKind::degenerate_input, "joint amplitude is identically zero");
  }
  jsa.amplitudes /= std::sqrt(integral);
  jsa.normalized = true;
}

} // namespace

void FrequencyGrid::validate() const {
  if (points_per_axis < 16 || !is_power_of_two(points_per_axis)) {
    throw Error(ErrorKind::validation,
                "grid.points_per_axis must be a power of two >= 16, got " +
                    std::to_string(points_per_axis));
  }
  if (!(half_span_nm > 0.0)) throw Error(ErrorKind::validation, "grid.half_span_nm must be positive");
  if (!(center_signal_nm > half_span_nm) || !(center_idler_nm > half_span_nm)) {
    throw Error(ErrorKind::validation, "grid centres must exceed grid.half_span_nm");
  }
}

std::vector<double> FrequencyGrid::signal_omegas() const {
  return axis_omegas(center_signal_nm, half_span_nm, points_per_axis);
}

std::vector<double> FrequencyGrid::idler_omegas() const {
  return axis_omegas(center_idler_nm, half_span_nm, points_per_axis);
}

double FrequencyGrid::signal_step() const {
  return (units::omega_from_nm(center_signal_nm - half_span_nm) -
          units::omega_from_nm(center_signal_nm + half_span_nm)) /
         (points_per_axis - 1);
}

double FrequencyGrid::idler_step() const {
  return (units::omega_from_nm(center_idler_nm - half_span_nm) -
          units::omega_from_nm(center_idler_nm + half_span_nm)) /
         (points_per_axis - 1);
}

void FilterSpec::validate() const {
  if (!(fwhm_nm > 0.0)) throw Error(ErrorKind::validation, "filter fwhm_nm must be positive");
  if (!(peak_transmission > 0.0 && peak_transmission <= 1.0)) {
    throw Error(ErrorKind::validation, "filter peak_transmission must lie in (0, 1]");
  }
}

double FilterSpec::transmission(double wavelength_nm) const {
  const double d = wavelength_nm - center_nm;
  switch (shape) {
  case FilterShape::gaussian:
    return peak_transmission * std::exp(-4.0 * std::log(2.0) * d * d / (fwhm_nm * fwhm_nm));
  case FilterShape::rectangular:
    return std::abs(d) <= 0.5 * fwhm_nm ? peak_transmission : 0.0;
  }
  return 0.0;
}

double FilterLoss::conditional(Arm arm) const {
  const double partner = arm == Arm::signal ? idler_arm : signal_arm;
  return partner > 0.0 ? joint / partner : 0.0;
}

double JointAmplitude::norm_integral() const {
  return sum_abs2(amplitudes) * grid.signal_step() * grid.idler_step();
}

JointAmplitude make_joint_amplitude(const FrequencyGrid& grid, Eigen::MatrixXcd amplitudes) {
  grid.validate();
  if (amplitudes.rows() != grid.points_per_axis || amplitudes.cols() != grid.points_per_axis) {
    throw Error(ErrorKind::validation, "amplitude matrix dimensions do not match the grid");
  }
  JointAmplitude jsa{grid, std::move(amplitudes), false, {}};
  normalize_in_place(jsa);
  return jsa;
}

double pump_sigma(const PumpSpec& pump) {
  const double fwhm = units::omega_width_from_nm(pump.center_wavelength_nm, pump.intensity_fwhm_nm);
  return fwhm / std::sqrt(2.0 * std::log(2.0));
}

double pump_envelope(double omega_signal, double omega_idler, const PumpSpec& pump) {
  const double detuning =
      omega_signal + omega_idler - units::omega_from_nm(pump.center_wavelength_nm);
  const double sigma = pump_sigma(pump);
  return std::exp(-detuning * detuning / (sigma * sigma));
}

std::complex<double> phasematching_function(double omega_signal, double omega_idler,
                                            const CrystalSpec& crystal) {
  const double x = 0.5 * crystal.length_um() * phasematch::phase_mismatch(crystal, omega_signal,
                                                                          omega_idler);
  return sinc(x) * std::polar(1.0, -x);
}

Eigen::MatrixXcd phasematching_matrix(const CrystalSpec& crystal, const FrequencyGrid& grid) {
  grid.validate();
  crystal.validate();
  require_grid_in_range(crystal, grid);
  const auto ws = grid.signal_omegas();
  const auto wi = grid.idler_omegas();
  const int n = grid.points_per_axis;
  Eigen::MatrixXcd phi(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) phi(i, j) = phasematching_function(ws[i], wi[j], crystal);
  return phi;
}

namespace {

JointAmplitude jsa_from_phasematching(const PumpSpec& pump, const FrequencyGrid& grid,
                                      const Eigen::MatrixXcd& phi) {
  const auto ws = grid.signal_omegas();
  const auto wi = grid.idler_omegas();
  const int n = grid.points_per_axis;
  Eigen::MatrixXcd f(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) f(i, j) = pump_envelope(ws[i], wi[j], pump) * phi(i, j);
  JointAmplitude jsa{grid, std::move(f), false, {}};
  normalize_in_place(jsa);
  return jsa;
}

} // namespace

JointAmplitude compute_jsa(const PumpSpec& pump, const CrystalSpec& crystal,
                           const FrequencyGrid& grid) {
  pump.validate();
  return jsa_from_phasematching(pump, grid, phasematching_matrix(crystal, grid));
}

JointAmplitude central_lobe(const JointAmplitude& jsa, const CrystalSpec& crystal) {
  const auto ws = jsa.grid.signal_omegas();
  const auto wi = jsa.grid.idler_omegas();
  JointAmplitude out = jsa;
  const int n = jsa.grid.points_per_axis;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double x = 0.5 * crystal.length_um() * phasematch::phase_mismatch(crystal, ws[i], wi[j]);
      if (std::abs(x) >= units::kPi) out.amplitudes(i, j) = 0.0;
    }
  }
  normalize_in_place(out);
  return out;
}

JointAmplitude apply_filter(const JointAmplitude& jsa,
                            const std::optional<FilterSpec>& signal_filter,
                            const std::optional<FilterSpec>& idler_filter) {
  const int n = jsa.grid.points_per_axis;
  auto arm_transmission = [&](const std::optional<FilterSpec>& filter,
                              const std::vector<double>& omegas, const char* arm) {
    std::vector<double> t(n, 1.0);
    if (!filter) return t;
    filter->validate();
    const double lo_nm = units::nm_from_omega(omegas.back());
    const double hi_nm = units::nm_from_omega(omegas.front());
    const bool outside = filter->center_nm + 0.5 * filter->fwhm_nm < lo_nm ||
                         filter->center_nm - 0.5 * filter->fwhm_nm > hi_nm;
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      t[k] = filter->transmission(units::nm_from_omega(omegas[k]));
      total += t[k];
    }
    if (outside || !(total > 0.0)) {
      std::ostringstream os;
      os << arm << " filter (" << filter->center_nm << " nm, FWHM " << filter->fwhm_nm
         << " nm) does not overlap the grid [" << lo_nm << ", " << hi_nm << "] nm";
      throw Error(ErrorKind::empty_result, os.str());
    }
    return t;
  };
  const auto ts = arm_transmission(signal_filter, jsa.grid.signal_omegas(), "signal");
  const auto ti = arm_transmission(idler_filter, jsa.grid.idler_omegas(), "idler");

  double before = 0.0, pass_s = 0.0, pass_i = 0.0, pass_both = 0.0;
  JointAmplitude out = jsa;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double p = std::norm(jsa.amplitudes(i, j));
      before += p;
      pass_s += p * ts[i];
      pass_i += p * ti[j];
      pass_both += p * ts[i] * ti[j];
      out.amplitudes(i, j) *= std::sqrt(ts[i] * ti[j]);
    }
  }
  if (!(pass_both > 0.0)) {
    throw Error(ErrorKind::empty_result, "filters remove the entire joint spectrum");
  }
  out.filter_loss.joint *= pass_both / before;
  out.filter_loss.signal_arm *= pass_s / before;
  out.filter_loss.idler_arm *= pass_i / before;
  normalize_in_place(out);
  return out;
}

SchmidtSpectrum schmidt_decompose(const JointAmplitude& jsa) {
  if (jsa.amplitudes.size() == 0 || !(sum_abs2(jsa.amplitudes) > 0.0)) {
    throw Error(ErrorKind::degenerate_input, "cannot decompose an all-zero joint amplitude");
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(jsa.amplitudes);
  const Eigen::VectorXd& sv = svd.singularValues();

  std::vector<std::pair<double, Eigen::Index>> modes;
  modes.reserve(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k) modes.emplace_back(sv[k] * sv[k], k);
  std::stable_sort(modes.begin(), modes.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  double total = 0.0;
  for (const auto& m : modes) total += m.first;

  SchmidtSpectrum out;
  double sum_sq = 0.0;
  for (const auto& m : modes) {
    const double lambda = m.first / total;
    if (lambda < 1.0e-16) break;
    out.coefficients.push_back(lambda);
    sum_sq += lambda * lambda;
  }
  out.purity = sum_sq;
  out.schmidt_number = 1.0 / sum_sq;
  return out;
}

MarginalSpectrum marginal_spectrum(const JointAmplitude& jsa, Arm arm) {
  const int n = jsa.grid.points_per_axis;
  const auto omegas = arm == Arm::signal ? jsa.grid.signal_omegas() : jsa.grid.idler_omegas();
  std::vector<double> p(n, 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = std::norm(jsa.amplitudes(i, j));
      p[arm == Arm::signal ? i : j] += v;
    }
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_input, "marginal spectrum is empty");

  // ω ascends, so reverse to get ascending wavelength.
  MarginalSpectrum out;
  out.wavelength_nm.resize(n);
  out.probability.resize(n);
  for (int k = 0; k < n; ++k) {
    out.wavelength_nm[k] = units::nm_from_omega(omegas[n - 1 - k]);
    out.probability[k] = p[n - 1 - k] / total;
  }
  const auto peak = std::max_element(out.probability.begin(), out.probability.end());
  const auto ipk = static_cast<int>(peak - out.probability.begin());
  const double half = 0.5 * *peak;
  auto cross = [&](int a, int b) {
    const double ya = out.probability[a], yb = out.probability[b];
    const double t = (half - ya) / (yb - ya);
    return out.wavelength_nm[a] + t * (out.wavelength_nm[b] - out.wavelength_nm[a]);
  };
  int l = ipk;
  while (l > 0 && out.probability[l - 1] >= half) --l;
  int r = ipk;
  while (r < n - 1 && out.probability[r + 1] >= half) ++r;
  const double left = l > 0 ? cross(l - 1, l) : out.wavelength_nm.front();
  const double right = r < n - 1 ? cross(r + 1, r) : out.wavelength_nm.back();
  out.fwhm_nm = right - left;
  return out;
}

double support_width_nm(const MarginalSpectrum& s, double fraction) {
  const auto& y = s.probability;
  const auto& x = s.wavelength_nm;
  const double level = fraction * *std::max_element(y.begin(), y.end());
  const int n = static_cast<int>(y.size());
  int first = 0;
  while (first < n && y[first] < level) ++first;
  int last = n - 1;
  while (last > 0 && y[last] < level) --last;
  auto interp = [&](int a, int b) {
    return x[a] + (level - y[a]) / (y[b] - y[a]) * (x[b] - x[a]);
  };
  const double left = first > 0 ? interp(first - 1, first) : x.front();
  const double right = last < n - 1 ? interp(last + 1, last) : x.back();
  return right - left;
}

BandwidthOptimum optimize_pump_bandwidth(const CrystalSpec& crystal, double pump_center_nm,
                                         BandwidthWindow window, const FrequencyGrid& grid,
                                         double tolerance_nm) {
  if (!(window.min_nm > 0.0) || !(window.max_nm > window.min_nm) ||
      !std::isfinite(window.max_nm)) {
    throw Error(ErrorKind::input, "pump bandwidth window must be a positive, bounded interval");
  }
  const Eigen::MatrixXcd phi = phasematching_matrix(crystal, grid);
  BandwidthOptimum result;
  auto purity_at = [&](double fwhm) {
    PumpSpec pump{pump_center_nm, fwhm, 81.0, std::nullopt};
    pump.validate();
    const double p = schmidt_decompose(jsa_from_phasematching(pump, grid, phi)).purity;
    result.trace.emplace_back(fwhm, p);
    return p;
  };

  constexpr int kScan = 9;
  std::vector<double> xs(kScan), ps(kScan);
  for (int k = 0; k < kScan; ++k) {
    xs[k] = window.min_nm + (window.max_nm - window.min_nm) * k / (kScan - 1);
    ps[k] = purity_at(xs[k]);
  }
  const auto best = static_cast<int>(std::max_element(ps.begin(), ps.end()) - ps.begin());
  if (best == 0 || best == kScan - 1) {
    std::ostringstream os;
    os << "purity maximum is not bracketed inside [" << window.min_nm << ", " << window.max_nm
       << "] nm; scan:";
    for (int k = 0; k < kScan; ++k) os << " (" << xs[k] << ", " << ps[k] << ")";
    throw Error(ErrorKind::search, os.str());
  }

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = xs[best - 1], b = xs[best + 1];
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double pc = purity_at(c), pd = purity_at(d);
  while (b - a > tolerance_nm) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - invphi * (b - a);
      pc = purity_at(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + invphi * (b - a);
      pd = purity_at(d);
    }
  }
  result.best_fwhm_nm = 0.5 * (a + b);
  result.best_purity = purity_at(result.best_fwhm_nm);
  return result;
}

} // namespace spdc::jsa
