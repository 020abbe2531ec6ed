#include "spdc/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "spdc/errors.hpp"

namespace spdc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads one section, tracking which keys were consumed so that typos surface
// as validation errors instead of silently falling back to defaults.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::validation, path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  T required(const std::string& key) {
    if (!has(key)) throw Error(ErrorKind::validation, "missing required field '" + field(key) + "'");
    return get<T>(key);
  }

  template <class T>
  T optional(const std::string& key, T fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    return get<T>(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.contains(key)) {
        throw Error(ErrorKind::validation, "unknown field '" + field(key) + "'");
      }
    }
  }

private:
  template <class T>
  T get(const std::string& key) {
    seen_.insert(key);
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::validation, "field '" + field(key) + "' has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

jsa::FilterSpec filter_from_json(const json& j, const std::string& path) {
  Section s(j, path);
  jsa::FilterSpec f;
  f.center_nm = s.required<double>("center_nm");
  f.fwhm_nm = s.required<double>("fwhm_nm");
  const auto shape = s.optional<std::string>("shape", "gaussian");
  if (shape == "gaussian") f.shape = jsa::FilterShape::gaussian;
  else if (shape == "rectangular") f.shape = jsa::FilterShape::rectangular;
  else throw Error(ErrorKind::validation, "field '" + s.field("shape") + "' must be gaussian or rectangular");
  f.peak_transmission = s.optional<double>("peak_transmission", 1.0);
  s.finish();
  return f;
}

json filter_to_json(const jsa::FilterSpec& f) {
  return {{"center_nm", f.center_nm},
          {"fwhm_nm", f.fwhm_nm},
          {"shape", f.shape == jsa::FilterShape::gaussian ? "gaussian" : "rectangular"},
          {"peak_transmission", f.peak_transmission}};
}

spectrometer::DcfSpec dcf_from_json(const json& j, const std::string& path) {
  if (j.is_string()) return spectrometer::dcf_preset(j.get<std::string>());
  Section s(j, path);
  spectrometer::DcfSpec d;
  d.total_dispersion_ps_per_nm = s.required<double>("total_dispersion_ps_per_nm");
  d.reference_wavelength_nm = s.required<double>("reference_wavelength_nm");
  d.insertion_delay_ns = s.optional<double>("insertion_delay_ns", 0.0);
  s.finish();
  return d;
}

json dcf_to_json(const spectrometer::DcfSpec& d) {
  return {{"total_dispersion_ps_per_nm", d.total_dispersion_ps_per_nm},
          {"reference_wavelength_nm", d.reference_wavelength_nm},
          {"insertion_delay_ns", d.insertion_delay_ns}};
}

efficiency::ArmBudget arm_budget_from_json(const json& j, const std::string& path) {
  Section s(j, path);
  efficiency::ArmBudget a;
  a.detector_efficiency = s.optional<double>("detector_efficiency", 1.0);
  a.optics_transmission = s.optional<double>("optics_transmission", 1.0);
  a.fiber_coupling = s.optional<double>("fiber_coupling", 1.0);
  a.filter_survival = s.optional<double>("filter_survival", 1.0);
  a.mode_overlap = s.optional<double>("mode_overlap", 1.0);
  s.finish();
  return a;
}

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

} // namespace

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw Error(ErrorKind::validation,
                "unsupported schema_version " + std::to_string(schema_version));
  }
  if (dispersion_file && !fs::exists(*dispersion_file)) {
    throw Error(ErrorKind::validation, "dispersion_file '" + *dispersion_file + "' does not exist");
  }
  pump.validate();
  crystal_spec().validate();
  grid.validate();
  if (signal_filter) signal_filter->validate();
  if (idler_filter) idler_filter->validate();
  spectrometer.signal_dcf.validate();
  spectrometer.idler_dcf.validate();
  if (!(spectrometer.bin_size_ns > 0.0))
    throw Error(ErrorKind::validation, "spectrometer.bin_size_ns must be positive");
  if (spectrometer.pairs < 1) throw Error(ErrorKind::validation, "spectrometer.pairs must be >= 1");
  if (!(tomography.depolarization >= 0.0 && tomography.depolarization <= 1.0))
    throw Error(ErrorKind::validation, "tomography.depolarization must lie in [0, 1]");
  if (!(tomography.amplitude_imbalance >= 0.0 && tomography.amplitude_imbalance <= 1.0))
    throw Error(ErrorKind::validation, "tomography.amplitude_imbalance must lie in [0, 1]");
  if (tomography.mean_counts < 1) throw Error(ErrorKind::validation, "tomography.mean_counts must be >= 1");
  if (!(hom.delay_step_fs > 0.0) || !(hom.delay_stop_fs >= hom.delay_start_fs))
    throw Error(ErrorKind::validation, "hom delays need step > 0 and stop >= start");
  if (!(hom.multipair_probability >= 0.0 && hom.multipair_probability < 0.25))
    throw Error(ErrorKind::validation, "hom.multipair_probability must lie in [0, 0.25)");
  budget.validate();
}

dispersion::Registry RunConfig::registry() const {
  if (dispersion_file) return dispersion::Registry::load(*dispersion_file);
  return dispersion::builtin_registry();
}

phasematch::CrystalSpec RunConfig::crystal_spec() const {
  return phasematch::CrystalSpec{crystal.length_mm, crystal.poling_period_um, crystal.temperature_c,
                                 registry().axes(axes.pump, axes.signal, axes.idler, axes.type_ii)};
}

RunConfig default_config() { return RunConfig{}; }

RunConfig config_from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  Section root(j, "config");
  c.schema_version = root.required<int>("schema_version");
  if (root.has("dispersion_file")) {
    fs::path p = root.required<std::string>("dispersion_file");
    if (p.is_relative()) p = fs::path(base_dir) / p;
    c.dispersion_file = fs::absolute(p).lexically_normal().string();
  } else {
    root.optional<std::string>("dispersion_file", "");
  }
  if (root.has("axes")) {
    Section s(root.raw("axes"), "axes");
    c.axes.pump = s.required<std::string>("pump");
    c.axes.signal = s.required<std::string>("signal");
    c.axes.idler = s.required<std::string>("idler");
    c.axes.type_ii = s.optional<bool>("type_ii", true);
    s.finish();
  }
  if (root.has("pump")) {
    Section s(root.raw("pump"), "pump");
    c.pump.center_wavelength_nm = s.required<double>("center_wavelength_nm");
    c.pump.intensity_fwhm_nm = s.required<double>("intensity_fwhm_nm");
    c.pump.repetition_rate_mhz = s.required<double>("repetition_rate_mhz");
    c.pump.pulse_duration_fs.reset();
    if (s.has("pulse_duration_fs")) c.pump.pulse_duration_fs = s.required<double>("pulse_duration_fs");
    else s.optional<double>("pulse_duration_fs", 0.0);
    s.finish();
  }
  if (root.has("crystal")) {
    Section s(root.raw("crystal"), "crystal");
    c.crystal.length_mm = s.required<double>("length_mm");
    c.crystal.poling_period_um = s.required<double>("poling_period_um");
    c.crystal.temperature_c = s.optional<double>("temperature_c", 20.0);
    s.finish();
  }
  if (root.has("grid")) {
    Section s(root.raw("grid"), "grid");
    c.grid.center_signal_nm = s.optional<double>("center_signal_nm", c.grid.center_signal_nm);
    c.grid.center_idler_nm = s.optional<double>("center_idler_nm", c.grid.center_idler_nm);
    c.grid.half_span_nm = s.optional<double>("half_span_nm", c.grid.half_span_nm);
    c.grid.points_per_axis = s.optional<int>("points_per_axis", c.grid.points_per_axis);
    s.finish();
  }
  if (root.has("filters")) {
    Section s(root.raw("filters"), "filters");
    if (s.has("signal")) c.signal_filter = filter_from_json(s.raw("signal"), "filters.signal");
    else s.optional<double>("signal", 0.0);
    if (s.has("idler")) c.idler_filter = filter_from_json(s.raw("idler"), "filters.idler");
    else s.optional<double>("idler", 0.0);
    s.finish();
  }
  if (root.has("spectrometer")) {
    Section s(root.raw("spectrometer"), "spectrometer");
    if (s.has("signal_dcf")) c.spectrometer.signal_dcf = dcf_from_json(s.raw("signal_dcf"), "spectrometer.signal_dcf");
    if (s.has("idler_dcf")) c.spectrometer.idler_dcf = dcf_from_json(s.raw("idler_dcf"), "spectrometer.idler_dcf");
    c.spectrometer.bin_size_ns = s.optional<double>("bin_size_ns", c.spectrometer.bin_size_ns);
    c.spectrometer.pairs = s.optional<std::uint64_t>("pairs", c.spectrometer.pairs);
    s.finish();
  }
  if (root.has("tomography")) {
    Section s(root.raw("tomography"), "tomography");
    c.tomography.depolarization = s.optional<double>("depolarization", c.tomography.depolarization);
    c.tomography.amplitude_imbalance = s.optional<double>("amplitude_imbalance", c.tomography.amplitude_imbalance);
    c.tomography.phase_error_rad = s.optional<double>("phase_error_rad", c.tomography.phase_error_rad);
    c.tomography.mean_counts = s.optional<std::uint64_t>("mean_counts", c.tomography.mean_counts);
    s.finish();
  }
  if (root.has("hom")) {
    Section s(root.raw("hom"), "hom");
    c.hom.delay_start_fs = s.optional<double>("delay_start_fs", c.hom.delay_start_fs);
    c.hom.delay_stop_fs = s.optional<double>("delay_stop_fs", c.hom.delay_stop_fs);
    c.hom.delay_step_fs = s.optional<double>("delay_step_fs", c.hom.delay_step_fs);
    c.hom.multipair_probability = s.optional<double>("multipair_probability", c.hom.multipair_probability);
    s.finish();
  }
  if (root.has("efficiency")) {
    Section s(root.raw("efficiency"), "efficiency");
    if (s.has("signal")) c.budget.signal = arm_budget_from_json(s.raw("signal"), "efficiency.signal");
    if (s.has("idler")) c.budget.idler = arm_budget_from_json(s.raw("idler"), "efficiency.idler");
    s.finish();
  }
  if (root.has("seeds")) {
    Section s(root.raw("seeds"), "seeds");
    c.seeds.spectrometer = s.optional<std::uint64_t>("spectrometer", c.seeds.spectrometer);
    c.seeds.tomography = s.optional<std::uint64_t>("tomography", c.seeds.tomography);
    s.finish();
  }
  c.output_dir = root.optional<std::string>("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["dispersion_file"] = c.dispersion_file ? json(*c.dispersion_file) : json(nullptr);
  j["axes"] = {{"pump", c.axes.pump}, {"signal", c.axes.signal}, {"idler", c.axes.idler},
               {"type_ii", c.axes.type_ii}};
  j["pump"] = {{"center_wavelength_nm", c.pump.center_wavelength_nm},
               {"intensity_fwhm_nm", c.pump.intensity_fwhm_nm},
               {"repetition_rate_mhz", c.pump.repetition_rate_mhz},
               {"pulse_duration_fs", c.pump.pulse_duration_fs ? json(*c.pump.pulse_duration_fs) : json(nullptr)}};
  j["crystal"] = {{"length_mm", c.crystal.length_mm},
                  {"poling_period_um", c.crystal.poling_period_um},
                  {"temperature_c", c.crystal.temperature_c}};
  j["grid"] = {{"center_signal_nm", c.grid.center_signal_nm},
               {"center_idler_nm", c.grid.center_idler_nm},
               {"half_span_nm", c.grid.half_span_nm},
               {"points_per_axis", c.grid.points_per_axis}};
  j["filters"] = {{"signal", c.signal_filter ? filter_to_json(*c.signal_filter) : json(nullptr)},
                  {"idler", c.idler_filter ? filter_to_json(*c.idler_filter) : json(nullptr)}};
  j["spectrometer"] = {{"signal_dcf", dcf_to_json(c.spectrometer.signal_dcf)},
                       {"idler_dcf", dcf_to_json(c.spectrometer.idler_dcf)},
                       {"bin_size_ns", c.spectrometer.bin_size_ns},
                       {"pairs", c.spectrometer.pairs}};
  j["tomography"] = {{"depolarization", c.tomography.depolarization},
                     {"amplitude_imbalance", c.tomography.amplitude_imbalance},
                     {"phase_error_rad", c.tomography.phase_error_rad},
                     {"mean_counts", c.tomography.mean_counts}};
  j["hom"] = {{"delay_start_fs", c.hom.delay_start_fs},
              {"delay_stop_fs", c.hom.delay_stop_fs},
              {"delay_step_fs", c.hom.delay_step_fs},
              {"multipair_probability", c.hom.multipair_probability}};
  j["efficiency"] = efficiency::budget_to_json(c.budget);
  j["seeds"] = {{"spectrometer", c.seeds.spectrometer}, {"tomography", c.seeds.tomography}};
  j["output_dir"] = c.output_dir;
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << path << ":" << line_of_byte(text, e.byte) << ": " << e.what();
    throw Error(ErrorKind::parse, os.str());
  }
  const auto base = fs::path(path).parent_path();
  return config_from_json(j, base.empty() ? "." : base.string());
}

void save_config(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write config '" + path + "'");
  out << std::setw(2) << config_to_json(config) << '\n';
}

std::string config_digest(const RunConfig& config) {
  const std::string canonical = config_to_json(config).dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int k = 0; k < len; ++k) os << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return os.str();
}

} // namespace spdc::cli
