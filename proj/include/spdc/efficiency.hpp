#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace spdc::efficiency {

/// Rates in counts/s over one integration window.
struct CountSummary {
  double singles_signal = 0.0;
  double singles_idler = 0.0;
  double coincidences = 0.0;
  double integration_s = 1.0;
  /// Accidental coincidence rate; subtracted only when set.
  std::optional<double> accidentals;

  void validate() const;
};

struct KlyshkoEfficiency {
  double signal = 0.0; // coincidences / idler singles
  double idler = 0.0;  // coincidences / signal singles
};

KlyshkoEfficiency klyshko(const CountSummary& counts);

/// Multiplicative transmissions of one arm, each in [0, 1].
struct ArmBudget {
  double detector_efficiency = 1.0;
  double optics_transmission = 1.0;
  double fiber_coupling = 1.0;
  double filter_survival = 1.0;
  double mode_overlap = 1.0;

  void validate() const;
  bool operator==(const ArmBudget&) const = default;
};

struct LossBudget {
  ArmBudget signal;
  ArmBudget idler;

  void validate() const;
  bool operator==(const LossBudget&) const = default;
};

/// Heralding efficiency of one arm: product of its factors.
double predict_heralding(const ArmBudget& arm);

LossBudget budget_from_json(const nlohmann::json& j);
nlohmann::json budget_to_json(const LossBudget& budget);

/// Header `singles_signal,singles_idler,coincidences,integration_s[,accidentals]`, one row.
CountSummary read_counts_csv(std::istream& in);

} // namespace spdc::efficiency
