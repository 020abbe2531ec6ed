#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "spdc/dispersion.hpp"
#include "spdc/efficiency.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/spectrometer.hpp"

namespace spdc::cli {

inline constexpr int kSchemaVersion = 1;

struct AxisNames {
  std::string pump = "ktp_y";
  std::string signal = "ktp_z";
  std::string idler = "ktp_y";
  bool type_ii = true;
  bool operator==(const AxisNames&) const = default;
};

struct CrystalGeometry {
  double length_mm = 2.0;
  double poling_period_um = 46.15;
  double temperature_c = 20.0;
  bool operator==(const CrystalGeometry&) const = default;
};

struct SpectrometerSettings {
  spectrometer::DcfSpec signal_dcf = spectrometer::dcf_preset("dcf_a");
  spectrometer::DcfSpec idler_dcf = spectrometer::dcf_preset("dcf_b");
  double bin_size_ns = spectrometer::kDefaultBinSizeNs;
  std::uint64_t pairs = 1000000;
  bool operator==(const SpectrometerSettings&) const = default;
};

struct TomographySettings {
  double depolarization = 0.028;
  double amplitude_imbalance = 0.0;
  double phase_error_rad = 0.0;
  std::uint64_t mean_counts = 10000;
  bool operator==(const TomographySettings&) const = default;
};

struct HomSettings {
  double delay_start_fs = -2000.0;
  double delay_stop_fs = 2000.0;
  double delay_step_fs = 20.0;
  double multipair_probability = 0.0015;
  bool operator==(const HomSettings&) const = default;
};

struct Seeds {
  std::uint64_t spectrometer = 1;
  std::uint64_t tomography = 1;
  bool operator==(const Seeds&) const = default;
};

/// Everything a pipeline run depends on. Default-constructed values are the
/// shipped design profile (configs/default.json).
struct RunConfig {
  int schema_version = kSchemaVersion;
  std::optional<std::string> dispersion_file;
  AxisNames axes;
  phasematch::PumpSpec pump{785.0, 5.35, 81.0, 170.0};
  CrystalGeometry crystal;
  jsa::FrequencyGrid grid;
  std::optional<jsa::FilterSpec> signal_filter;
  std::optional<jsa::FilterSpec> idler_filter;
  SpectrometerSettings spectrometer;
  TomographySettings tomography;
  HomSettings hom;
  efficiency::LossBudget budget;
  Seeds seeds;
  std::string output_dir = "out";

  /// Re-checks every embedded invariant; throws validation errors.
  void validate() const;
  dispersion::Registry registry() const;
  phasematch::CrystalSpec crystal_spec() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig default_config();

/// Missing top-level sections take the default profile; inside a section
/// that is present, the physically essential fields are required.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json config_to_json(const RunConfig& config);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

/// SHA-256 (hex) of the canonical JSON form.
std::string config_digest(const RunConfig& config);

} // namespace spdc::cli
