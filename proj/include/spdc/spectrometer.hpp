#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spdc/jsa.hpp"

namespace spdc::spectrometer {

/// Linear (first-order GVD) wavelength-to-time map of a dispersive fibre.
struct DcfSpec {
  double total_dispersion_ps_per_nm = -412.9;
  double reference_wavelength_nm = 1570.0;
  double insertion_delay_ns = 0.0;

  void validate() const;
  bool operator==(const DcfSpec&) const = default;
};

struct DcfPreset {
  std::string name;
  DcfSpec dcf;
  std::string note;
};

inline constexpr double kDefaultBinSizeNs = 0.128;

/// Two fibres back-solved from the quoted 0.31 nm / 0.33 nm resolutions at
/// the default bin size (inferred, not measured).
const std::vector<DcfPreset>& dcf_presets();
const DcfSpec& dcf_preset(const std::string& name);

double wavelength_to_arrival(const DcfSpec& dcf, double wavelength_nm);
double arrival_to_wavelength(const DcfSpec& dcf, double arrival_ns);

/// Spacing between pump pulses in ns.
double pulse_period_ns(double repetition_rate_mhz);

/// Spectral width of one time bin: bin_size / |D| in nm.
double resolution_estimate(const DcfSpec& dcf, double bin_size_ns);

/// Wavelength span that fits inside one pulse period.
double usable_bandwidth_nm(const DcfSpec& dcf, double repetition_rate_mhz);

/// Time-of-flight coincidence histogram. Bin k of an arm covers
/// [insertion_delay + (k - n/2)·bin, insertion_delay + (k - n/2 + 1)·bin), with n
/// even and n·bin <= pulse period. Events outside are wraps.
struct TofHistogram {
  std::vector<double> edges_signal_ns;
  std::vector<double> edges_idler_ns;
  std::vector<std::vector<std::uint64_t>> counts; // [signal bin][idler bin]
  double bin_size_ns = 0.0;
  double window_ns = 0.0; // binned span
  double period_ns = 0.0;
  std::uint64_t total_pairs = 0;
  std::uint64_t wraps = 0;
  bool wrap_warning = false;

  std::uint64_t total_counts() const;
  std::vector<double> centers_signal_ns() const;
  std::vector<double> centers_idler_ns() const;
};

/// Draws `total_pairs` frequency pairs from |f|² (uniform within a grid
/// cell), maps them through the fibres, folds into the pulse period and bins.
TofHistogram simulate_jsi_histogram(const jsa::JointAmplitude& jsa, const DcfSpec& dcf_signal,
                                    const DcfSpec& dcf_idler, const phasematch::PumpSpec& pump,
                                    double bin_size_ns, std::uint64_t total_pairs,
                                    std::uint64_t seed);

struct IndependenceTest {
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int rows_used = 0;
  int cols_used = 0;
};

/// Pearson χ² test of row/column independence on the sub-table of bins
/// whose expected counts all reach `min_expected`.
IndependenceTest chi2_independence(const std::vector<std::vector<std::uint64_t>>& counts,
                                   double min_expected = 5.0);

/// Pearson correlation of the signal and idler bin indices over all counts.
double bin_correlation(const TofHistogram& hist);

/// First row: idler bin centres; first column: signal bin centres (ns).
void write_histogram_csv(std::ostream& out, const TofHistogram& hist,
                         const std::vector<std::string>& comments = {});

} // namespace spdc::spectrometer
