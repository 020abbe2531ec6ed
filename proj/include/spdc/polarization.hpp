#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spdc::polarization {

enum class Projector { H, V, D, A, R, L };

char to_char(Projector p);
Projector projector_from_char(char c);
Eigen::Vector2cd projector_state(Projector p);

/// Two-photon polarization state, basis order |HH>, |HV>, |VH>, |VV>.
class TwoQubitState {
public:
  /// Validates Hermiticity (1e-10), unit trace (1e-9) and PSD (-1e-9).
  explicit TwoQubitState(const Eigen::Matrix4cd& rho);

  const Eigen::Matrix4cd& rho() const { return rho_; }

private:
  Eigen::Matrix4cd rho_;
};

/// (|HV> - |VH>)/sqrt(2).
Eigen::Vector4cd singlet();

/// (1 - p)|ψ><ψ| + p I/4 with ψ = sqrt((1+ε)/2)|HV> - e^{iφ} sqrt((1-ε)/2)|VH>.
TwoQubitState model_state(double depolarization, double amplitude_imbalance, double phase_error);

double fidelity_singlet(const TwoQubitState& state);
double state_purity(const TwoQubitState& state);
/// Wootters concurrence.
double concurrence(const TwoQubitState& state);
/// Squared concurrence.
double tangle(const TwoQubitState& state);
double trace_distance(const TwoQubitState& a, const TwoQubitState& b);

struct TomographyRecord {
  Projector setting_a = Projector::H;
  Projector setting_b = Projector::H;
  std::uint64_t counts = 0;
  double integration_s = 1.0;

  bool operator==(const TomographyRecord&) const = default;
};

using Setting = std::pair<Projector, Projector>;

/// All 36 pairs of the six polarization eigenstates.
std::vector<Setting> standard_settings();

/// Poisson counts with mean mean_counts·Tr(ρ P_a⊗P_b) per setting.
std::vector<TomographyRecord> simulate_tomography(const TwoQubitState& state,
                                                  const std::vector<Setting>& settings,
                                                  std::uint64_t mean_counts, std::uint64_t seed,
                                                  double integration_s = 1.0);

struct MleOptions {
  double gradient_tolerance = 1.0e-8;
  int max_iterations = 100000;
};

struct MleResult {
  TwoQubitState state;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

/// Poisson maximum-likelihood reconstruction with ρ ∝ T T†, T lower triangular.
MleResult reconstruct_mle(const std::vector<TomographyRecord>& records,
                          const MleOptions& options = {});

void write_records_csv(std::ostream& out, const std::vector<TomographyRecord>& records,
                       const std::vector<std::string>& comments = {});
std::vector<TomographyRecord> read_records_csv(std::istream& in);

} // namespace spdc::polarization
