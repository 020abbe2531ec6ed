#include <doctest.h>

#include <cmath>

#include "spdc/dispersion.hpp"
#include "spdc/errors.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/units.hpp"
#include "support.hpp"

using namespace spdc;
using namespace spdc::jsa;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;
}

const JointAmplitude& default_jsa() {
  static const JointAmplitude f = compute_jsa(PumpSpec{}, phasematch::default_crystal(), FrequencyGrid{});
  return f;
}

// Constant-index crystal whose mismatch depends on ω_i only, with the zero
// placed at `zero_nm` on the idler axis.
phasematch::CrystalSpec idler_only_crystal(double zero_nm, double length_mm) {
  dispersion::CrystalAxes axes{dispersion::constant_index_set("p", 1.8), dispersion::constant_index_set("s", 1.8),
                               dispersion::constant_index_set("i", 1.9), true};
  const double dk = -0.1 * units::omega_from_nm(zero_nm) / units::kSpeedOfLight;
  return {length_mm, 2.0 * units::kPi / -dk, 20.0, axes};
}

FrequencyGrid small_grid(int n) { return FrequencyGrid{1570.0, 1570.0, 60.0, n}; }

// Random physically sensible source on a coarse grid.
struct Instance {
  PumpSpec pump;
  phasematch::CrystalSpec crystal;
  FrequencyGrid grid;
};

Instance random_instance(gen::Stream& s) {
  Instance in;
  in.pump.intensity_fwhm_nm = s.uniform(1.0, 20.0);
  in.crystal = phasematch::default_crystal();
  in.crystal.length_mm = s.uniform(0.5, 5.0);
  in.crystal.temperature_c = s.uniform(15.0, 40.0);
  in.crystal.poling_period_um *= s.uniform(0.999, 1.001);
  in.grid = FrequencyGrid{s.uniform(1560.0, 1580.0), s.uniform(1560.0, 1580.0), s.uniform(30.0, 80.0),
                          1 << s.integer(4, 6)};
  return in;
}

} // namespace

TEST_SUITE("jsa") {

TEST_CASE("pump envelope is 1 on the energy-conservation line and 1/e at sigma") {
  const PumpSpec pump;
  const double wp = units::omega_from_nm(pump.center_wavelength_nm);
  CHECK(pump_envelope(0.5 * wp, 0.5 * wp, pump) == 1.0);
  CHECK(pump_envelope(0.5 * wp, 0.5 * wp + pump_sigma(pump), pump) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("pump intensity is one half at the wavelength-domain half-maximum points") {
  const PumpSpec pump;
  for (double sign : {-1.0, 1.0}) {
    const double w = units::omega_from_nm(pump.center_wavelength_nm + sign * 0.5 * pump.intensity_fwhm_nm);
    const double a = pump_envelope(0.5 * w, 0.5 * w, pump);
    CHECK(std::abs(a * a - 0.5) < 0.005);
  }
}

TEST_CASE("phase-matching function at zero mismatch is 1 + 0i") {
  auto crystal = phasematch::default_crystal();
  crystal.poling_period_um = phasematch::solve_poling_period(785.0, 1570.0, 1570.0, 20.0, crystal.axes);
  const auto phi = phasematching_function(units::omega_from_nm(1570.0), units::omega_from_nm(1570.0), crystal);
  CHECK(phi.real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(phi.imag()) < 1e-9);
}

TEST_CASE("phase-matching function vanishes at L dK / 2 = pi and peaks at the first side lobe") {
  const auto base = idler_only_crystal(1570.0, 2.0);
  const double ws = units::omega_from_nm(1570.0);
  // Shift the idler frequency so that L·ΔK/2 hits a target value x.
  auto at_x = [&](double x) {
    const double dwi = -2.0 * x / base.length_um() / (-0.1 / units::kSpeedOfLight);
    return phasematching_function(ws, units::omega_from_nm(1570.0) + dwi, base);
  };
  CHECK(std::abs(at_x(units::kPi)) < 1e-12);
  const auto [x1, peak] = oracle::first_sidelobe();
  CHECK(x1 == doctest::Approx(4.4934).epsilon(1e-4));
  CHECK(std::abs(at_x(x1)) == doctest::Approx(peak).epsilon(1e-9));
  CHECK(peak == doctest::Approx(0.2172).epsilon(1e-3));
}

TEST_CASE("default parameters give purity 0.84 and agree with the trace oracle") {
  const auto s = schmidt_decompose(default_jsa());
  CHECK(std::abs(s.purity - 0.84) < 0.03);
  CHECK(s.purity == doctest::Approx(oracle::purity_by_trace(default_jsa().amplitudes)).epsilon(1e-9));
}

TEST_CASE("phase matching along one axis with a broad pump is separable") {
  PumpSpec pump;
  pump.intensity_fwhm_nm = 300.0;
  const auto f = compute_jsa(pump, idler_only_crystal(1570.0, 2.0), small_grid(128));
  CHECK(schmidt_decompose(f).purity > 0.99);
}

TEST_CASE("grid outside the dispersion range fails before computing") {
  FrequencyGrid g{1900.0, 1900.0, 150.0, 32};
  CHECK(kind_of([&] { compute_jsa(PumpSpec{}, phasematch::default_crystal(), g); }) == ErrorKind::range);
}

TEST_CASE("grid validation") {
  CHECK(kind_of([] { FrequencyGrid{1570, 1570, 60, 100}.validate(); }) == ErrorKind::validation);
  CHECK(kind_of([] { FrequencyGrid{1570, 1570, 60, 8}.validate(); }) == ErrorKind::validation);
  CHECK(kind_of([] { FrequencyGrid{1570, 1570, -1, 64}.validate(); }) == ErrorKind::validation);
}

TEST_CASE("grid spacing is uniform in angular frequency") {
  const FrequencyGrid g = small_grid(64);
  const auto w = g.signal_omegas();
  CHECK(w.front() == doctest::Approx(units::omega_from_nm(1630.0)).epsilon(1e-14));
  CHECK(w.back() == doctest::Approx(units::omega_from_nm(1510.0)).epsilon(1e-14));
  for (std::size_t k = 1; k < w.size(); ++k) CHECK(w[k] - w[k - 1] == doctest::Approx(g.signal_step()).epsilon(1e-9));
}

TEST_CASE("identity filter leaves the amplitude unchanged") {
  const FilterSpec wide{1570.0, 1.0e6, FilterShape::rectangular, 1.0};
  const auto f = apply_filter(default_jsa(), wide, wide);
  CHECK((f.amplitudes - default_jsa().amplitudes).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.filter_loss.joint == 1.0);
}

TEST_CASE("8 nm Gaussian filters on both arms") {
  const FilterSpec filter{1570.0, 8.0, FilterShape::gaussian, 1.0};
  const auto f = apply_filter(default_jsa(), filter, filter);
  CHECK(schmidt_decompose(f).purity >= 0.98);
  CHECK(oracle::purity_by_trace(f.amplitudes) >= 0.98);
  CHECK(std::abs(f.filter_loss.signal_arm - 0.5) < 0.15);
  CHECK(std::abs(f.filter_loss.idler_arm - 0.5) < 0.15);
  CHECK(f.filter_loss.joint < f.filter_loss.signal_arm);
  CHECK(f.filter_loss.conditional(Arm::signal) == doctest::Approx(f.filter_loss.joint / f.filter_loss.idler_arm));
}

TEST_CASE("filter outside the grid is an empty-result error") {
  const FilterSpec far{1300.0, 8.0, FilterShape::rectangular, 1.0};
  CHECK(kind_of([&] { apply_filter(default_jsa(), far, std::nullopt); }) == ErrorKind::empty_result);
}

TEST_CASE("filtering never decreases purity for Gaussian filters narrower than the marginal") {
  const double base = schmidt_decompose(default_jsa()).purity;
  for (double w : {4.0, 8.0, 12.0}) {
    const FilterSpec filter{1570.0, w, FilterShape::gaussian, 1.0};
    CHECK(schmidt_decompose(apply_filter(default_jsa(), filter, filter)).purity >= base);
  }
}

TEST_CASE("rank-one and two-mode Schmidt spectra") {
  const FrequencyGrid g = small_grid(16);
  gen::Stream s(31);
  const Eigen::VectorXcd u = s.complex_matrix(16, 1), v = s.complex_matrix(16, 1);
  const auto one = schmidt_decompose(make_joint_amplitude(g, u * v.transpose()));
  REQUIRE(one.coefficients.size() == 1);
  CHECK(one.coefficients[0] == doctest::Approx(1.0));
  CHECK(one.purity == doctest::Approx(1.0));

  Eigen::MatrixXcd two = Eigen::MatrixXcd::Zero(16, 16);
  two(2, 5) = 1.0;
  two(7, 9) = 1.0;
  const auto s2 = schmidt_decompose(make_joint_amplitude(g, two));
  REQUIRE(s2.coefficients.size() == 2);
  CHECK(s2.coefficients[0] == doctest::Approx(0.5));
  CHECK(s2.coefficients[1] == doctest::Approx(0.5));
  CHECK(s2.purity == doctest::Approx(0.5));
  CHECK(s2.schmidt_number == doctest::Approx(2.0));
}

TEST_CASE("all-zero amplitude is degenerate") {
  JointAmplitude z{small_grid(16), Eigen::MatrixXcd::Zero(16, 16), false, {}};
  CHECK(kind_of([&] { schmidt_decompose(z); }) == ErrorKind::degenerate_input);
  CHECK(kind_of([&] { make_joint_amplitude(small_grid(16), Eigen::MatrixXcd::Zero(16, 16)); }) ==
        ErrorKind::degenerate_input);
}

TEST_CASE("paper marginals are about 15 nm wide") {
  for (Arm arm : {Arm::signal, Arm::idler}) {
    const auto m = marginal_spectrum(default_jsa(), arm);
    CHECK(std::abs(m.fwhm_nm - 15.0) < 2.0);
    double total = 0.0;
    for (double p : m.probability) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < m.wavelength_nm.size(); ++k) CHECK(m.wavelength_nm[k] > m.wavelength_nm[k - 1]);
  }
}

TEST_CASE("rectangular synthetic JSA has FWHM equal to its width") {
  const FrequencyGrid g = small_grid(512);
  const auto ws = g.signal_omegas();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(512, 512);
  for (int i = 0; i < 512; ++i) {
    const double nm = units::nm_from_omega(ws[i]);
    if (nm >= 1560.0 && nm <= 1580.0) m.row(i).setConstant(1.0);
  }
  const auto spec = marginal_spectrum(make_joint_amplitude(g, m), Arm::signal);
  const double step_nm = units::nm_width_from_omega(1570.0, g.signal_step());
  CHECK(std::abs(spec.fwhm_nm - 20.0) <= step_nm);
}

TEST_CASE("central-lobe support above 1% of peak is roughly 35 nm") {
  const auto lobe = central_lobe(default_jsa(), phasematch::default_crystal());
  const double width = support_width_nm(marginal_spectrum(lobe, Arm::signal), 0.01);
  CHECK(std::abs(width - 35.0) < 0.15 * 35.0);
}

TEST_CASE("pump bandwidth optimum, endpoint property and crystal-length trend") {
  const FrequencyGrid g = small_grid(256);
  const auto two = optimize_pump_bandwidth(phasematch::default_crystal(), 785.0, {2.0, 12.0}, g);
  CHECK(std::abs(two.best_fwhm_nm - 5.35) < 0.8);
  double lo_end = 0.0, hi_end = 0.0;
  for (const auto& [w, p] : two.trace) {
    if (w == 2.0) lo_end = p;
    if (w == 12.0) hi_end = p;
  }
  CHECK(two.best_purity >= lo_end);
  CHECK(two.best_purity >= hi_end);

  auto four_mm = phasematch::default_crystal();
  four_mm.length_mm = 4.0;
  const auto four = optimize_pump_bandwidth(four_mm, 785.0, {1.0, 12.0}, g);
  CHECK(four.best_fwhm_nm < two.best_fwhm_nm);
}

TEST_CASE("optimizer reports a search error when the maximum is not bracketed") {
  try {
    optimize_pump_bandwidth(phasematch::default_crystal(), 785.0, {2.0, 3.0}, small_grid(64));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::search);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("property: normalization, Schmidt sums and purity bounds over random sources") {
  gen::Stream s(32);
  for (int k = 0; k < gen::kInstances; ++k) {
    const auto in = random_instance(s);
    const auto f = compute_jsa(in.pump, in.crystal, in.grid);
    CHECK(std::abs(f.norm_integral() - 1.0) < 1e-9);
    const FilterSpec filter{in.grid.center_signal_nm, s.uniform(12.0, 30.0),
                            k % 2 ? FilterShape::gaussian : FilterShape::rectangular, s.uniform(0.2, 1.0)};
    const auto filtered = apply_filter(f, filter, filter);
    CHECK(std::abs(filtered.norm_integral() - 1.0) < 1e-9);
    for (const auto* x : {&f, &filtered}) {
      const auto sc = schmidt_decompose(*x);
      double sum = 0.0;
      for (double c : sc.coefficients) sum += c;
      CHECK(std::abs(sum - 1.0) < 1e-9);
      CHECK(std::abs(sc.purity * sc.schmidt_number - 1.0) < 1e-9);
      CHECK(sc.purity > 0.0);
      CHECK(sc.purity <= 1.0 + 1e-12);
      for (std::size_t i = 1; i < sc.coefficients.size(); ++i) CHECK(sc.coefficients[i] <= sc.coefficients[i - 1]);
    }
  }
}

TEST_CASE("property: identical signal and idler dispersion gives a symmetric JSA") {
  gen::Stream s(33);
  for (int k = 0; k < gen::kInstances; ++k) {
    const auto& reg = dispersion::builtin_registry();
    auto crystal = phasematch::default_crystal();
    crystal.axes = reg.axes("ktp_z", "ktp_y", "ktp_y", false);
    crystal.length_mm = s.uniform(0.5, 5.0);
    crystal.poling_period_um = s.uniform(20.0, 60.0);
    PumpSpec pump;
    pump.intensity_fwhm_nm = s.uniform(1.0, 20.0);
    const double c = s.uniform(1560.0, 1580.0);
    const FrequencyGrid g{c, c, s.uniform(30.0, 80.0), 32};
    const auto f = compute_jsa(pump, crystal, g);
    CHECK((f.amplitudes - f.amplitudes.transpose()).cwiseAbs().maxCoeff() < 1e-9 * f.amplitudes.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("property: repeated computation is bit-identical") {
  gen::Stream s(34);
  for (int k = 0; k < gen::kInstances; ++k) {
    const auto in = random_instance(s);
    const auto a = compute_jsa(in.pump, in.crystal, in.grid);
    const auto b = compute_jsa(in.pump, in.crystal, in.grid);
    CHECK(a.amplitudes == b.amplitudes);
    CHECK(schmidt_decompose(a).coefficients == schmidt_decompose(b).coefficients);
  }
}

}
