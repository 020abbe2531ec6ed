#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spdc/jsa.hpp"

namespace spdc::interference {

/// Reduced spectral density matrix of one heralded photon, sampled on the
/// angular-frequency axis of the JSA grid it came from.
struct SpectralState {
  std::vector<double> omegas; // rad/fs, ascending
  Eigen::MatrixXcd density;   // trace 1

  std::vector<double> wavelengths_nm() const;
  double purity() const;
  /// Throws state error on Hermiticity/trace/eigenvalue violations.
  void validate() const;
};

struct HomCurve {
  std::vector<double> delays_fs;
  std::vector<double> coincidence_probability;
  double visibility = 0.0;
};

/// Traces out the herald arm: ρ(ω,ω') = Σ_h f(ω,h) f*(ω',h) T(h) Δω_h, then
/// renormalizes to unit trace.
SpectralState heralded_spectral_state(const jsa::JointAmplitude& jsa, jsa::Arm heralded_arm,
                                      const std::optional<jsa::FilterSpec>& herald_filter = {});

/// Re Tr(ρ_a ρ_b) clamped to [0, 1].
double hom_visibility(const SpectralState& a, const SpectralState& b);

/// P(τ) = ½[1 - Re Tr(ρ_a D(τ) ρ_b D(-τ))], D(τ) = diag(e^{iωτ}).
HomCurve hom_curve(const SpectralState& a, const SpectralState& b,
                   const std::vector<double>& delays_fs);

/// First-order double-pair penalty 1 - 2 p_c.
double multipair_visibility_bound(double pair_probability);

struct VisibilityPrediction {
  double spectral = 0.0;
  double multipair = 1.0;
  double total = 0.0; // spectral · multipair
};

VisibilityPrediction predict_visibility(const SpectralState& a, const SpectralState& b,
                                        double pair_probability);

} // namespace spdc::interference
