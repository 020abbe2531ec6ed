#include "spdc/spectrometer.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "spdc/errors.hpp"
#include "spdc/units.hpp"

namespace spdc::spectrometer {

void DcfSpec::validate() const {
  if (!(std::isfinite(total_dispersion_ps_per_nm) && total_dispersion_ps_per_nm != 0.0)) {
    throw Error(ErrorKind::validation, "dcf.total_dispersion_ps_per_nm must be non-zero");
  }
  if (!(reference_wavelength_nm > 0.0)) {
    throw Error(ErrorKind::validation, "dcf.reference_wavelength_nm must be positive");
  }
}

const std::vector<DcfPreset>& dcf_presets() {
  static const std::vector<DcfPreset> presets{
      {"dcf_a", {-412.9, 1570.0, 0.0}, "inferred from 0.31 nm resolution at 0.128 ns bins"},
      {"dcf_b", {-387.9, 1570.0, 0.0}, "inferred from 0.33 nm resolution at 0.128 ns bins"},
  };
  return presets;
}

const DcfSpec& dcf_preset(const std::string& name) {
  for (const auto& p : dcf_presets())
    if (p.name == name) return p.dcf;
  throw Error(ErrorKind::validation, "unknown DCF preset '" + name + "'");
}

double wavelength_to_arrival(const DcfSpec& dcf, double wavelength_nm) {
  return dcf.insertion_delay_ns +
         dcf.total_dispersion_ps_per_nm * 1.0e-3 * (wavelength_nm - dcf.reference_wavelength_nm);
}

double arrival_to_wavelength(const DcfSpec& dcf, double arrival_ns) {
  return dcf.reference_wavelength_nm +
         (arrival_ns - dcf.insertion_delay_ns) / (dcf.total_dispersion_ps_per_nm * 1.0e-3);
}

double pulse_period_ns(double repetition_rate_mhz) {
  if (!(repetition_rate_mhz > 0.0)) throw Error(ErrorKind::input, "repetition rate must be positive");
  return 1.0e3 / repetition_rate_mhz;
}

double resolution_estimate(const DcfSpec& dcf, double bin_size_ns) {
  return bin_size_ns / std::abs(dcf.total_dispersion_ps_per_nm * 1.0e-3);
}

double usable_bandwidth_nm(const DcfSpec& dcf, double repetition_rate_mhz) {
  return pulse_period_ns(repetition_rate_mhz) / std::abs(dcf.total_dispersion_ps_per_nm * 1.0e-3);
}

std::uint64_t TofHistogram::total_counts() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

namespace {

std::vector<double> centers(const std::vector<double>& edges) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) out.push_back(0.5 * (edges[k] + edges[k + 1]));
  return out;
}

} // namespace

std::vector<double> TofHistogram::centers_signal_ns() const { return centers(edges_signal_ns); }
std::vector<double> TofHistogram::centers_idler_ns() const { return centers(edges_idler_ns); }

TofHistogram simulate_jsi_histogram(const jsa::JointAmplitude& jsa, const DcfSpec& dcf_signal,
                                    const DcfSpec& dcf_idler, const phasematch::PumpSpec& pump,
                                    double bin_size_ns, std::uint64_t total_pairs,
                                    std::uint64_t seed) {
  dcf_signal.validate();
  dcf_idler.validate();
  pump.validate();
  const double period = pulse_period_ns(pump.repetition_rate_mhz);
  if (!(bin_size_ns > 0.0) || bin_size_ns > 0.5 * period) {
    throw Error(ErrorKind::input, "bin size must be positive and at most half the pulse period");
  }
  auto nbins = static_cast<std::int64_t>(std::floor(period / bin_size_ns));
  nbins -= nbins % 2;
  const std::int64_t half = nbins / 2;

  TofHistogram hist;
  hist.bin_size_ns = bin_size_ns;
  hist.window_ns = static_cast<double>(nbins) * bin_size_ns;
  hist.period_ns = period;
  hist.total_pairs = total_pairs;
  hist.counts.assign(static_cast<std::size_t>(nbins), std::vector<std::uint64_t>(nbins, 0));
  for (std::int64_t k = 0; k <= nbins; ++k) {
    hist.edges_signal_ns.push_back(dcf_signal.insertion_delay_ns + static_cast<double>(k - half) * bin_size_ns);
    hist.edges_idler_ns.push_back(dcf_idler.insertion_delay_ns + static_cast<double>(k - half) * bin_size_ns);
  }

  const int n = jsa.grid.points_per_axis;
  std::vector<double> weights(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) weights[static_cast<std::size_t>(i) * n + j] = std::norm(jsa.amplitudes(i, j));
  std::discrete_distribution<std::size_t> cell(weights.begin(), weights.end());
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  std::mt19937_64 rng(seed);

  const auto ws = jsa.grid.signal_omegas();
  const auto wi = jsa.grid.idler_omegas();
  const double dws = jsa.grid.signal_step();
  const double dwi = jsa.grid.idler_step();

  // Bin index relative to the insertion delay; (t - t0)/(b/2) is exactly
  // twice (t - t0)/b, which keeps halved-bin histograms aggregable.
  auto bin_of = [&](double t, const DcfSpec& dcf) -> std::int64_t {
    const double rel = t - dcf.insertion_delay_ns;
    const auto k = static_cast<std::int64_t>(std::floor(rel / bin_size_ns)) + half;
    return (k < 0 || k >= nbins) ? -1 : k;
  };

  for (std::uint64_t p = 0; p < total_pairs; ++p) {
    const std::size_t c = cell(rng);
    const auto i = static_cast<int>(c / n);
    const auto j = static_cast<int>(c % n);
    const double omega_s = ws[i] + jitter(rng) * dws;
    const double omega_i = wi[j] + jitter(rng) * dwi;
    const double ts = wavelength_to_arrival(dcf_signal, units::nm_from_omega(omega_s));
    const double ti = wavelength_to_arrival(dcf_idler, units::nm_from_omega(omega_i));
    const auto bs = bin_of(ts, dcf_signal);
    const auto bi = bin_of(ti, dcf_idler);
    if (bs < 0 || bi < 0) {
      ++hist.wraps;
      continue;
    }
    ++hist.counts[static_cast<std::size_t>(bs)][static_cast<std::size_t>(bi)];
  }
  hist.wrap_warning = hist.wraps > 0;
  return hist;
}

IndependenceTest chi2_independence(const std::vector<std::vector<std::uint64_t>>& counts,
                                   double min_expected) {
  const std::size_t rows = counts.size();
  const std::size_t cols = rows ? counts[0].size() : 0;
  std::vector<double> r(rows, 0.0), c(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      const auto v = static_cast<double>(counts[i][j]);
      r[i] += v;
      c[j] += v;
      total += v;
    }
  if (!(total > 0.0)) throw Error(ErrorKind::degenerate_input, "histogram is empty");

  // Shrink to rows/columns whose margins support min_expected in every cell.
  std::vector<std::size_t> ri, ci;
  double threshold = std::sqrt(min_expected * total);
  for (int pass = 0; pass < 50; ++pass) {
    ri.clear();
    ci.clear();
    for (std::size_t i = 0; i < rows; ++i) if (r[i] >= threshold) ri.push_back(i);
    for (std::size_t j = 0; j < cols; ++j) if (c[j] >= threshold) ci.push_back(j);
    double sub = 0.0, rmin = INFINITY, cmin = INFINITY;
    std::vector<double> rs(ri.size(), 0.0), cs(ci.size(), 0.0);
    for (std::size_t a = 0; a < ri.size(); ++a)
      for (std::size_t b = 0; b < ci.size(); ++b) {
        const auto v = static_cast<double>(counts[ri[a]][ci[b]]);
        rs[a] += v;
        cs[b] += v;
        sub += v;
      }
    for (double v : rs) rmin = std::min(rmin, v);
    for (double v : cs) cmin = std::min(cmin, v);
    if (ri.size() < 2 || ci.size() < 2 || rmin * cmin / sub >= min_expected) break;
    threshold *= 1.1;
  }
  if (ri.size() < 2 || ci.size() < 2) {
    throw Error(ErrorKind::degenerate_input, "too few populated bins for a chi-square test");
  }

  std::vector<double> rs(ri.size(), 0.0), cs(ci.size(), 0.0);
  double sub = 0.0;
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < ci.size(); ++b) {
      const auto v = static_cast<double>(counts[ri[a]][ci[b]]);
      rs[a] += v;
      cs[b] += v;
      sub += v;
    }
  IndependenceTest out;
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < ci.size(); ++b) {
      const double e = rs[a] * cs[b] / sub;
      const double d = static_cast<double>(counts[ri[a]][ci[b]]) - e;
      out.chi2 += d * d / e;
    }
  out.rows_used = static_cast<int>(ri.size());
  out.cols_used = static_cast<int>(ci.size());
  out.dof = (out.rows_used - 1) * (out.cols_used - 1);
  boost::math::chi_squared dist(out.dof);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi2));
  return out;
}

double bin_correlation(const TofHistogram& hist) {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    for (std::size_t j = 0; j < hist.counts[i].size(); ++j) {
      const auto w = static_cast<double>(hist.counts[i][j]);
      const auto x = static_cast<double>(i), y = static_cast<double>(j);
      n += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      syy += w * y * y;
      sxy += w * x * y;
    }
  if (!(n > 0.0)) throw Error(ErrorKind::degenerate_input, "histogram is empty");
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

void write_histogram_csv(std::ostream& out, const TofHistogram& hist,
                         const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "# bin_size_ns=" << hist.bin_size_ns << " window_ns=" << hist.window_ns
      << " period_ns=" << hist.period_ns << " total_pairs=" << hist.total_pairs
      << " wraps=" << hist.wraps << '\n';
  const auto cs = hist.centers_signal_ns();
  const auto ci = hist.centers_idler_ns();
  out << "signal_ns\\idler_ns";
  for (double t : ci) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < cs.size(); ++i) {
    out << cs[i];
    for (auto v : hist.counts[i]) out << ',' << v;
    out << '\n';
  }
}

} // namespace spdc::spectrometer
