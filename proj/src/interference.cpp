#include "spdc/interference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::interference {

namespace {

void require_shared_axis(const SpectralState& a, const SpectralState& b) {
  if (a.omegas != b.omegas) {
    throw Error(ErrorKind::axis,
                "spectral states live on different frequency grids; recompute both on a "
                "shared grid");
  }
}

// Σ_jk Re(ρa_jk · conj(ρb_jk) · e^{i(ω_k - ω_j)τ}), which equals
// Re Tr(ρa D(τ) ρb D(-τ)) for Hermitian ρb.
double overlap(const SpectralState& a, const SpectralState& b, double tau) {
  const Eigen::Index n = a.density.rows();
  double acc = 0.0;
  if (tau == 0.0) {
    for (Eigen::Index k = 0; k < n; ++k) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const auto x = a.density(j, k);
        const auto y = b.density(j, k);
        acc += x.real() * y.real() + x.imag() * y.imag();
      }
    }
    return acc;
  }
  std::vector<std::complex<double>> phase(n);
  for (Eigen::Index k = 0; k < n; ++k) phase[k] = std::polar(1.0, a.omegas[k] * tau);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto term = a.density(j, k) * std::conj(b.density(j, k)) * phase[k] * std::conj(phase[j]);
      acc += term.real();
    }
  }
  return acc;
}

} // namespace

std::vector<double> SpectralState::wavelengths_nm() const {
  std::vector<double> out(omegas.size());
  std::transform(omegas.begin(), omegas.end(), out.begin(), units::nm_from_omega);
  return out;
}

double SpectralState::purity() const { return overlap(*this, *this, 0.0); }

void SpectralState::validate() const {
  if (density.rows() != density.cols() ||
      density.rows() != static_cast<Eigen::Index>(omegas.size())) {
    throw Error(ErrorKind::state, "spectral density dimensions do not match its axis");
  }
  if ((density - density.adjoint()).cwiseAbs().maxCoeff() > 1.0e-10) {
    throw Error(ErrorKind::state, "spectral density is not Hermitian");
  }
  if (std::abs(density.trace().real() - 1.0) > 1.0e-9) {
    throw Error(ErrorKind::state, "spectral density trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(density, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1.0e-10) {
    throw Error(ErrorKind::state, "spectral density has a negative eigenvalue");
  }
}

SpectralState heralded_spectral_state(const jsa::JointAmplitude& jsa, jsa::Arm heralded_arm,
                                      const std::optional<jsa::FilterSpec>& herald_filter) {
  const bool signal = heralded_arm == jsa::Arm::signal;
  // Rows of `f` index the heralded photon, columns the traced herald photon.
  const Eigen::MatrixXcd f = signal ? jsa.amplitudes : Eigen::MatrixXcd(jsa.amplitudes.transpose());
  const auto herald_omegas = signal ? jsa.grid.idler_omegas() : jsa.grid.signal_omegas();
  const double herald_step = signal ? jsa.grid.idler_step() : jsa.grid.signal_step();

  Eigen::VectorXd weights(herald_omegas.size());
  for (std::size_t h = 0; h < herald_omegas.size(); ++h) {
    const double t = herald_filter ? herald_filter->transmission(units::nm_from_omega(herald_omegas[h]))
                                   : 1.0;
    weights[static_cast<Eigen::Index>(h)] = t * herald_step;
  }
  if (herald_filter) herald_filter->validate();

  SpectralState out;
  out.omegas = signal ? jsa.grid.signal_omegas() : jsa.grid.idler_omegas();
  out.density = f * weights.asDiagonal() * f.adjoint();
  const double trace = out.density.trace().real();
  if (!(trace > 0.0)) {
    throw Error(ErrorKind::degenerate_input, "herald filter leaves no heralded amplitude");
  }
  out.density /= trace;
  // Exact Hermiticity for downstream symmetric overlaps.
  out.density = 0.5 * (out.density + out.density.adjoint()).eval();
  return out;
}

double hom_visibility(const SpectralState& a, const SpectralState& b) {
  require_shared_axis(a, b);
  return std::clamp(overlap(a, b, 0.0), 0.0, 1.0);
}

HomCurve hom_curve(const SpectralState& a, const SpectralState& b,
                   const std::vector<double>& delays_fs) {
  require_shared_axis(a, b);
  HomCurve curve;
  curve.delays_fs = delays_fs;
  curve.coincidence_probability.reserve(delays_fs.size());
  for (double tau : delays_fs) {
    curve.coincidence_probability.push_back(0.5 * (1.0 - overlap(a, b, tau)));
  }
  curve.visibility = hom_visibility(a, b);
  return curve;
}

double multipair_visibility_bound(double pair_probability) {
  if (!(pair_probability >= 0.0 && pair_probability < 0.25)) {
    std::ostringstream os;
    os << "pair probability " << pair_probability << " outside [0, 0.25)";
    throw Error(ErrorKind::input, os.str());
  }
  return 1.0 - 2.0 * pair_probability;
}

VisibilityPrediction predict_visibility(const SpectralState& a, const SpectralState& b,
                                        double pair_probability) {
  VisibilityPrediction p;
  p.spectral = hom_visibility(a, b);
  p.multipair = multipair_visibility_bound(pair_probability);
  p.total = p.spectral * p.multipair;
  return p;
}

} // namespace spdc::interference
