#include "spdc/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::dispersion {

namespace {

std::string format_range(const WavelengthRange& r) {
  std::ostringstream os;
  os << "[" << r.min_nm << ", " << r.max_nm << "] nm";
  return os.str();
}

void require_in_range(const SellmeierSet& set, double wavelength_nm) {
  if (!std::isfinite(wavelength_nm) || !set.valid_range.contains(wavelength_nm)) {
    std::ostringstream os;
    os << "wavelength " << wavelength_nm << " nm is outside the valid range of '"
       << set.name << "' " << format_range(set.valid_range);
    throw Error(ErrorKind::range, os.str());
  }
}

double poly_in_inverse_lambda(const std::vector<double>& c, double lambda_um) {
  double acc = 0.0;
  double inv = 1.0;
  for (double coefficient : c) {
    acc += coefficient * inv;
    inv /= lambda_um;
  }
  return acc;
}

} // namespace

std::string to_string(FormulaVariant variant) {
  switch (variant) {
  case FormulaVariant::constant: return "constant";
  case FormulaVariant::one_pole: return "one_pole";
  case FormulaVariant::two_pole: return "two_pole";
  case FormulaVariant::offset_pole: return "offset_pole";
  }
  return "constant";
}

FormulaVariant formula_variant_from_string(const std::string& tag) {
  if (tag == "constant") return FormulaVariant::constant;
  if (tag == "one_pole") return FormulaVariant::one_pole;
  if (tag == "two_pole") return FormulaVariant::two_pole;
  if (tag == "offset_pole") return FormulaVariant::offset_pole;
  throw Error(ErrorKind::validation, "unknown Sellmeier formula variant '" + tag + "'");
}

std::size_t coefficient_count(FormulaVariant variant) {
  switch (variant) {
  case FormulaVariant::constant: return 1;
  case FormulaVariant::one_pole: return 4;
  case FormulaVariant::two_pole: return 6;
  case FormulaVariant::offset_pole: return 4;
  }
  return 0;
}

void SellmeierSet::validate() const {
  if (name.empty()) throw Error(ErrorKind::validation, "Sellmeier set has an empty name");
  if (coefficients.size() != coefficient_count(variant)) {
    throw Error(ErrorKind::validation,
                "Sellmeier set '" + name + "' (" + to_string(variant) + ") needs " +
                    std::to_string(coefficient_count(variant)) + " coefficients, got " +
                    std::to_string(coefficients.size()));
  }
  if (!(valid_range.min_nm > 0.0) || !(valid_range.max_nm > valid_range.min_nm)) {
    throw Error(ErrorKind::validation,
                "Sellmeier set '" + name + "' has an empty valid range " + format_range(valid_range));
  }
  for (double nm : {valid_range.min_nm, 0.5 * (valid_range.min_nm + valid_range.max_nm),
                    valid_range.max_nm}) {
    double n = sellmeier_index(*this, nm);
    if (!(n > 1.0)) {
      throw Error(ErrorKind::validation, "Sellmeier set '" + name +
                                             "' evaluates to an index <= 1 inside its range");
    }
  }
}

SellmeierSet constant_index_set(std::string name, double index, WavelengthRange range) {
  SellmeierSet set;
  set.name = std::move(name);
  set.variant = FormulaVariant::constant;
  set.coefficients = {index};
  set.valid_range = range;
  set.provenance = "synthetic dispersionless";
  return set;
}

void CrystalAxes::validate() const {
  pump.validate();
  signal.validate();
  idler.validate();
  if (type_ii && signal.name == idler.name) {
    throw Error(ErrorKind::validation,
                "type-II binding requires orthogonal signal/idler axes, both are '" +
                    signal.name + "'");
  }
}

double sellmeier_index(const SellmeierSet& set, double wavelength_nm) {
  const auto& c = set.coefficients;
  const double l = units::um_from_nm(wavelength_nm);
  const double l2 = l * l;
  double n2 = 0.0;
  switch (set.variant) {
  case FormulaVariant::constant:
    return c[0];
  case FormulaVariant::one_pole:
    n2 = c[0] + c[1] / (1.0 - c[2] / l2) - c[3] * l2;
    break;
  case FormulaVariant::two_pole:
    n2 = c[0] + c[1] / (1.0 - c[2] / l2) + c[3] / (1.0 - c[4] / l2) - c[5] * l2;
    break;
  case FormulaVariant::offset_pole:
    n2 = c[0] + c[1] / (l2 - c[2]) - c[3] * l2;
    break;
  }
  return std::sqrt(n2);
}

double refractive_index(const SellmeierSet& set, double wavelength_nm, double temperature_c) {
  require_in_range(set, wavelength_nm);
  double n = sellmeier_index(set, wavelength_nm);
  const double dt = temperature_c - set.reference_temperature_c;
  if (set.thermal && dt != 0.0) {
    const double l = units::um_from_nm(wavelength_nm);
    n += poly_in_inverse_lambda(set.thermal->linear, l) * dt +
         poly_in_inverse_lambda(set.thermal->quadratic, l) * dt * dt;
  }
  return n;
}

double wavenumber(const SellmeierSet& set, double wavelength_nm, double temperature_c) {
  const double n = refractive_index(set, wavelength_nm, temperature_c);
  return 2.0 * units::kPi * n / units::um_from_nm(wavelength_nm);
}

double wavenumber_at(const SellmeierSet& set, double omega, double temperature_c) {
  const double n = refractive_index(set, units::nm_from_omega(omega), temperature_c);
  return n * omega / units::kSpeedOfLight;
}

double inverse_group_velocity(const SellmeierSet& set, double wavelength_nm,
                              double temperature_c, double step) {
  require_in_range(set, wavelength_nm);
  const double omega = units::omega_from_nm(wavelength_nm);
  const double lo = units::nm_from_omega(omega + step);
  const double hi = units::nm_from_omega(omega - step);
  if (!set.valid_range.contains(lo) || !set.valid_range.contains(hi)) {
    std::ostringstream os;
    os << "finite-difference neighbourhood [" << lo << ", " << hi << "] nm around "
       << wavelength_nm << " nm leaves the valid range of '" << set.name << "' "
       << format_range(set.valid_range);
    throw Error(ErrorKind::range, os.str());
  }
  const double k_plus = wavenumber_at(set, omega + step, temperature_c);
  const double k_minus = wavenumber_at(set, omega - step, temperature_c);
  return (k_plus - k_minus) / (2.0 * step);
}

// ---------------------------------------------------------------------------
// Registry

void Registry::add(SellmeierSet set) {
  set.validate();
  if (sets_.contains(set.name)) {
    throw Error(ErrorKind::validation, "duplicate Sellmeier set name '" + set.name + "'");
  }
  std::string key = set.name;
  sets_.emplace(std::move(key), std::move(set));
}

const SellmeierSet& Registry::get(const std::string& name) const {
  auto it = sets_.find(name);
  if (it == sets_.end()) {
    throw Error(ErrorKind::validation, "no Sellmeier set named '" + name + "' in registry");
  }
  return it->second;
}

bool Registry::contains(const std::string& name) const { return sets_.contains(name); }

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sets_) out.push_back(name);
  return out;
}

CrystalAxes Registry::axes(const std::string& pump, const std::string& signal,
                           const std::string& idler, bool type_ii) const {
  CrystalAxes a{get(pump), get(signal), get(idler), type_ii};
  a.validate();
  return a;
}

namespace {

SellmeierSet set_from_json(const nlohmann::json& j) {
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) {
      throw Error(ErrorKind::validation,
                  std::string("Sellmeier entry is missing field '") + key + "'");
    }
    return j.at(key);
  };
  SellmeierSet s;
  s.name = require("name").get<std::string>();
  s.variant = formula_variant_from_string(require("formula").get<std::string>());
  s.coefficients = require("coefficients").get<std::vector<double>>();
  auto range = require("valid_range_nm").get<std::vector<double>>();
  if (range.size() != 2) {
    throw Error(ErrorKind::validation, "valid_range_nm of '" + s.name + "' must have 2 entries");
  }
  s.valid_range = {range[0], range[1]};
  s.reference_temperature_c = j.value("reference_temperature_c", 20.0);
  s.provenance = j.value("provenance", std::string{});
  if (j.contains("thermal") && !j.at("thermal").is_null()) {
    const auto& t = j.at("thermal");
    ThermalModel m;
    m.linear = t.value("dn_dT", std::vector<double>{});
    m.quadratic = t.value("d2n_dT2", std::vector<double>{});
    m.poling_expansion = t.value("poling_expansion_per_c", 0.0);
    s.thermal = std::move(m);
  }
  return s;
}

nlohmann::json set_to_json(const SellmeierSet& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["formula"] = to_string(s.variant);
  j["coefficients"] = s.coefficients;
  j["valid_range_nm"] = {s.valid_range.min_nm, s.valid_range.max_nm};
  j["reference_temperature_c"] = s.reference_temperature_c;
  j["provenance"] = s.provenance;
  if (s.thermal) {
    j["thermal"] = {{"dn_dT", s.thermal->linear},
                    {"d2n_dT2", s.thermal->quadratic},
                    {"poling_expansion_per_c", s.thermal->poling_expansion}};
  } else {
    j["thermal"] = nullptr;
  }
  return j;
}

} // namespace

Registry Registry::from_json(const nlohmann::json& document) {
  if (!document.is_object() || !document.contains("sets") || !document.at("sets").is_array()) {
    throw Error(ErrorKind::validation, "dispersion registry needs a top-level 'sets' array");
  }
  Registry r;
  try {
    for (const auto& entry : document.at("sets")) r.add(set_from_json(entry));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, std::string("dispersion registry: ") + e.what());
  }
  return r;
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open dispersion file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, "dispersion file '" + path + "': " + e.what());
  }
  return from_json(doc);
}

nlohmann::json Registry::to_json() const {
  nlohmann::json sets = nlohmann::json::array();
  for (const auto& [_, s] : sets_) sets.push_back(set_to_json(s));
  return {{"schema_version", 1}, {"sets", sets}};
}

// KTP coefficient sets. y: König & Wong, APL 84, 1644 (2004). z: Fradkin et
// al., APL 74, 914 (1999). Thermo-optic and expansion data: Emanueli & Arie,
// Appl. Opt. 42, 6661 (2003), referenced to 25 °C.
const Registry& builtin_registry() {
  static const Registry registry = [] {
    ThermalModel y_thermal{{6.2897e-6, 6.3061e-6, -6.0629e-6, 2.6486e-6},
                           {-0.14445e-8, 2.2244e-8, -3.5770e-8, 1.3470e-8},
                           6.7e-6};
    ThermalModel z_thermal{{9.9587e-6, 9.9228e-6, -8.9603e-6, 4.1010e-6},
                           {-1.1882e-8, 10.459e-8, -9.8136e-8, 3.1481e-8},
                           6.7e-6};
    Registry r;
    r.add(SellmeierSet{"ktp_y",
                       FormulaVariant::one_pole,
                       {2.09930, 0.922683, 0.0467695, 0.0138408},
                       {400.0, 2000.0},
                       y_thermal,
                       25.0,
                       "n_y: Konig & Wong 2004; dn/dT: Emanueli & Arie 2003"});
    r.add(SellmeierSet{"ktp_z",
                       FormulaVariant::two_pole,
                       {2.12725, 1.18431, 0.0514852, 0.6603, 100.00507, 0.00968956},
                       {400.0, 2000.0},
                       z_thermal,
                       25.0,
                       "n_z: Fradkin et al. 1999; dn/dT: Emanueli & Arie 2003"});
    return r;
  }();
  return registry;
}

CrystalAxes default_ktp_axes() {
  return builtin_registry().axes("ktp_y", "ktp_z", "ktp_y", true);
}

} // namespace spdc::dispersion
