#include <doctest.h>

#include <cmath>

#include "spdc/errors.hpp"
#include "spdc/interference.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/units.hpp"
#include "support.hpp"

using namespace spdc;
using namespace spdc::interference;

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

const jsa::JointAmplitude& default_jsa() {
  static const auto f = jsa::compute_jsa(jsa::PumpSpec{}, phasematch::default_crystal(), jsa::FrequencyGrid{});
  return f;
}

jsa::FrequencyGrid grid(int n) { return {1570.0, 1570.0, 60.0, n}; }

// Pure heralded state built from a single spectral mode.
SpectralState pure_state(const Eigen::VectorXcd& mode, int n) {
  Eigen::MatrixXcd m = mode * Eigen::RowVectorXcd::Unit(n, n / 2);
  return heralded_spectral_state(jsa::make_joint_amplitude(grid(n), m), jsa::Arm::signal);
}

// Direct quadrature of ½[1 - Re Σ ρa(ω,ω') ρb(ω',ω) e^{i(ω-ω')τ}].
double coincidence_oracle(const SpectralState& a, const SpectralState& b, double tau) {
  const auto n = a.density.rows();
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      acc += a.density(i, j) * b.density(j, i) *
             std::polar(1.0, (a.omegas[static_cast<std::size_t>(i)] - a.omegas[static_cast<std::size_t>(j)]) * tau);
  return 0.5 * (1.0 - acc.real());
}

} // namespace

TEST_SUITE("interference") {

TEST_CASE("heralded state purity equals Schmidt purity for the default JSA") {
  const auto rho = heralded_spectral_state(default_jsa(), jsa::Arm::signal);
  const double p = jsa::schmidt_decompose(default_jsa()).purity;
  CHECK(rho.purity() == doctest::Approx(p).epsilon(1e-9));
  CHECK(std::abs(rho.purity() - 0.84) < 0.03);
  CHECK_NOTHROW(rho.validate());
}

TEST_CASE("rank-one JSA heralds a pure state") {
  gen::Stream s(41);
  const Eigen::MatrixXcd u = s.complex_matrix(32, 1), v = s.complex_matrix(32, 1);
  const auto f = jsa::make_joint_amplitude(grid(32), u * v.transpose());
  CHECK(heralded_spectral_state(f, jsa::Arm::idler).purity() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("heralded purity agrees with the Schmidt purity on random JSAs") {
  gen::Stream s(42);
  for (int k = 0; k < 10; ++k) {
    const auto f = jsa::make_joint_amplitude(grid(32), s.complex_matrix(32, 32));
    const double p = jsa::schmidt_decompose(f).purity;
    CHECK(std::abs(heralded_spectral_state(f, jsa::Arm::signal).purity() - p) < 1e-6);
    CHECK(std::abs(heralded_spectral_state(f, jsa::Arm::idler).purity() - p) < 1e-6);
  }
}

TEST_CASE("herald filter that removes everything is degenerate") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(32, 32);
  m(3, 0) = 1.0;
  const auto f = jsa::make_joint_amplitude(grid(32), m);
  const jsa::FilterSpec narrow{1511.0, 0.001, jsa::FilterShape::rectangular, 1.0};
  CHECK(kind_of([&] { heralded_spectral_state(f, jsa::Arm::signal, narrow); }) == ErrorKind::degenerate_input);
}

TEST_CASE("identical pure states interfere perfectly; disjoint states not at all") {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(32), b = Eigen::VectorXcd::Zero(32);
  a(4) = 1.0;
  b(20) = 1.0;
  CHECK(hom_visibility(pure_state(a, 32), pure_state(a, 32)) == doctest::Approx(1.0));
  CHECK(hom_visibility(pure_state(a, 32), pure_state(b, 32)) == doctest::Approx(0.0));
}

TEST_CASE("two copies of the default state: visibility equals purity") {
  const auto rho = heralded_spectral_state(default_jsa(), jsa::Arm::signal);
  const double v = hom_visibility(rho, rho);
  CHECK(v == doctest::Approx(rho.purity()).epsilon(1e-9));
  CHECK(std::abs(v - 0.84) < 0.03);
}

TEST_CASE("mismatched axes are rejected") {
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(32), b = Eigen::VectorXcd::Zero(64);
  a(1) = 1.0;
  b(1) = 1.0;
  CHECK(kind_of([&] { hom_visibility(pure_state(a, 32), pure_state(b, 64)); }) == ErrorKind::axis);
  CHECK(kind_of([&] { hom_curve(pure_state(a, 32), pure_state(b, 64), {0.0}); }) == ErrorKind::axis);
}

TEST_CASE("hom curve: zero at tau 0 for identical pure states, one half at large delay") {
  Eigen::VectorXcd mode(64);
  const auto w = grid(64).signal_omegas();
  for (int k = 0; k < 64; ++k) mode(k) = std::exp(-std::pow((w[k] - w[32]) / 0.01, 2));
  const auto rho = pure_state(mode, 64);
  const auto c = hom_curve(rho, rho, {0.0, 50000.0});
  CHECK(std::abs(c.coincidence_probability[0]) < 1e-12);
  CHECK(std::abs(c.coincidence_probability[1] - 0.5) < 1e-3);
}

TEST_CASE("filtered default state: dip matches direct quadrature and the filter's Fourier width") {
  const jsa::FilterSpec filter{1570.0, 8.0, jsa::FilterShape::gaussian, 1.0};
  const auto f = jsa::apply_filter(default_jsa(), filter, filter);
  const auto rho = heralded_spectral_state(f, jsa::Arm::signal);
  const std::vector<double> delays{-600.0, -200.0, 0.0, 250.0, 900.0};
  const auto curve = hom_curve(rho, rho, delays);
  for (std::size_t k = 0; k < delays.size(); ++k) {
    CHECK(curve.coincidence_probability[k] == doctest::Approx(coincidence_oracle(rho, rho, delays[k])).epsilon(1e-9));
  }
  // For a near-pure Gaussian spectrum of intensity FWHM Δω the dip is
  // exp(-s²τ²) with s = Δω/(2√(2 ln2)), so its FWHM is 4√2 ln2/Δω. The
  // heralded spectrum is the filter times the 15.75 nm marginal.
  const double width_nm = 1.0 / std::sqrt(1.0 / 64.0 + 1.0 / (15.75 * 15.75));
  const double dw = units::omega_width_from_nm(1570.0, width_nm);
  const double expected = 4.0 * std::sqrt(2.0) * std::log(2.0) / dw;
  std::vector<double> taus;
  for (double t = 0.0; t <= 2000.0; t += 1.0) taus.push_back(t);
  const auto dense = hom_curve(rho, rho, taus);
  const double floor = dense.coincidence_probability[0];
  const double half = 0.5 * (floor + 0.5);
  double tau_half = 0.0;
  for (std::size_t k = 1; k < taus.size(); ++k) {
    if (dense.coincidence_probability[k] >= half) {
      const double p0 = dense.coincidence_probability[k - 1], p1 = dense.coincidence_probability[k];
      tau_half = taus[k - 1] + (half - p0) / (p1 - p0);
      break;
    }
  }
  CHECK(std::abs(2.0 * tau_half - expected) / expected < 0.15);
}

TEST_CASE("multipair bound") {
  CHECK(multipair_visibility_bound(0.0015) == doctest::Approx(0.997).epsilon(1e-15));
  CHECK(multipair_visibility_bound(0.0) == 1.0);
  CHECK(multipair_visibility_bound(0.05) == doctest::Approx(0.90).epsilon(1e-15));
  CHECK(kind_of([] { multipair_visibility_bound(0.25); }) == ErrorKind::input);
  CHECK(kind_of([] { multipair_visibility_bound(-0.01); }) == ErrorKind::input);
}

TEST_CASE("combined prediction itemizes both factors") {
  const auto rho = heralded_spectral_state(default_jsa(), jsa::Arm::signal);
  const auto p = predict_visibility(rho, rho, 0.0015);
  CHECK(p.multipair == doctest::Approx(0.997));
  CHECK(p.total == doctest::Approx(p.spectral * p.multipair).epsilon(1e-15));
}

TEST_CASE("property: symmetry, Cauchy-Schwarz, curve consistency and phase invariance") {
  gen::Stream s(44);
  for (int k = 0; k < gen::kInstances; ++k) {
    const auto fa = jsa::make_joint_amplitude(grid(16), s.complex_matrix(16, 16));
    const auto fb = jsa::make_joint_amplitude(grid(16), s.complex_matrix(16, 16));
    const auto a = heralded_spectral_state(fa, jsa::Arm::signal);
    const auto b = heralded_spectral_state(fb, jsa::Arm::idler);
    CHECK_NOTHROW(a.validate());
    CHECK_NOTHROW(b.validate());
    const double vab = hom_visibility(a, b);
    CHECK(vab == hom_visibility(b, a));
    CHECK(std::abs(hom_visibility(a, a) - a.purity()) < 1e-9);
    CHECK(vab <= std::sqrt(a.purity() * b.purity()) + 1e-9);
    const auto c = hom_curve(a, b, {0.0, s.uniform(-500.0, 500.0)});
    CHECK(std::abs(c.coincidence_probability[0] - 0.5 * (1.0 - vab)) < 1e-9);
    CHECK(c.coincidence_probability[1] >= -1e-12);
    CHECK(c.coincidence_probability[1] <= 0.5 + 1e-12);

    // A global phase on the heralded photon's basis leaves ρ, and so V, unchanged.
    const auto phased = jsa::make_joint_amplitude(grid(16), fa.amplitudes * std::polar(1.0, s.uniform(0.0, 6.28)));
    CHECK(std::abs(hom_visibility(heralded_spectral_state(phased, jsa::Arm::signal), b) - vab) < 1e-12);
  }
}

}
