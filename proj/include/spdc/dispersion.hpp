#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace spdc::dispersion {

/// Functional form of a Sellmeier fit. λ is in µm; c0, c1, ... are the
/// entries of `SellmeierSet::coefficients` in order.
enum class FormulaVariant {
  constant,    // n = c0
  one_pole,    // n² = c0 + c1/(1 - c2/λ²) - c3·λ²
  two_pole,    // n² = c0 + c1/(1 - c2/λ²) + c3/(1 - c4/λ²) - c5·λ²
  offset_pole, // n² = c0 + c1/(λ² - c2) - c3·λ²
};

std::string to_string(FormulaVariant variant);
FormulaVariant formula_variant_from_string(const std::string& tag);
std::size_t coefficient_count(FormulaVariant variant);

/// Temperature dependence relative to `reference_temperature_c`:
///   Δn = Σ_m linear[m]/λ^m · ΔT + Σ_m quadratic[m]/λ^m · ΔT²   (λ in µm)
/// and the poling period grows as Λ(T) = Λ·(1 + poling_expansion·ΔT).
struct ThermalModel {
  std::vector<double> linear;
  std::vector<double> quadratic;
  double poling_expansion = 0.0; // 1/°C

  bool operator==(const ThermalModel&) const = default;
};

struct WavelengthRange {
  double min_nm = 0.0;
  double max_nm = 0.0;

  bool contains(double nm) const { return nm >= min_nm && nm <= max_nm; }
  bool operator==(const WavelengthRange&) const = default;
};

struct SellmeierSet {
  std::string name;
  FormulaVariant variant = FormulaVariant::constant;
  std::vector<double> coefficients;
  WavelengthRange valid_range;
  std::optional<ThermalModel> thermal;
  double reference_temperature_c = 20.0;
  std::string provenance;

  /// Throws validation error if the coefficient count, range or sample index is off.
  void validate() const;

  bool operator==(const SellmeierSet&) const = default;
};

/// A synthetic dispersionless set; handy for analytic limits.
SellmeierSet constant_index_set(std::string name, double index,
                                WavelengthRange range = {200.0, 5000.0});

/// Assignment of fields to crystal axes. For type-II the two daughters are
/// polarized along orthogonal axes.
struct CrystalAxes {
  SellmeierSet pump;
  SellmeierSet signal;
  SellmeierSet idler;
  bool type_ii = true;

  void validate() const;
  bool operator==(const CrystalAxes&) const = default;
};

class Registry {
public:
  Registry() = default;

  /// Adds `set`; names must be unique.
  void add(SellmeierSet set);
  const SellmeierSet& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Binds registry entries to the three fields.
  CrystalAxes axes(const std::string& pump, const std::string& signal,
                   const std::string& idler, bool type_ii = true) const;

  static Registry from_json(const nlohmann::json& document);
  static Registry load(const std::string& path);
  nlohmann::json to_json() const;

private:
  std::map<std::string, SellmeierSet> sets_;
};

/// KTP y and z axes with thermo-optic data, as used for the shipped designs.
const Registry& builtin_registry();

/// Default type-II binding: pump and idler on y, signal on z.
CrystalAxes default_ktp_axes();

/// Index without the thermal correction (the bare Sellmeier fit).
double sellmeier_index(const SellmeierSet& set, double wavelength_nm);

double refractive_index(const SellmeierSet& set, double wavelength_nm,
                        double temperature_c);

/// k = 2π n / λ in rad/µm.
double wavenumber(const SellmeierSet& set, double wavelength_nm, double temperature_c);

/// Same quantity evaluated at angular frequency ω (rad/fs): k = n ω / c.
double wavenumber_at(const SellmeierSet& set, double omega, double temperature_c);

inline constexpr double kDefaultFrequencyStep = 1.0e-4; // rad/fs

/// k' = dk/dω in fs/µm via a central difference of half-width `step` (rad/fs).
double inverse_group_velocity(const SellmeierSet& set, double wavelength_nm,
                              double temperature_c,
                              double step = kDefaultFrequencyStep);

} // namespace spdc::dispersion
