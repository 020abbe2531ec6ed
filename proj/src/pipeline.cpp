#include "spdc/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "spdc/efficiency.hpp"
#include "spdc/errors.hpp"
#include "spdc/interference.hpp"
#include "spdc/jsa.hpp"
#include "spdc/phasematch.hpp"
#include "spdc/polarization.hpp"
#include "spdc/spectrometer.hpp"
#include "spdc/units.hpp"

namespace spdc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  const RunConfig& config;
  const PipelineRequest& request;
  std::string digest;
  std::ostream& out;
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  f << std::setprecision(12);
  return f;
}

fs::path output_file(const Context& ctx, const std::string& default_name) {
  if (ctx.request.out) return *ctx.request.out;
  return fs::path(ctx.config.output_dir) / default_name;
}

fs::path output_dir(const Context& ctx) {
  return ctx.request.out ? fs::path(*ctx.request.out) : fs::path(ctx.config.output_dir);
}

// A report is an ordered list of scalar fields rendered either as aligned
// "key: value" text or as one JSON object.
class Report {
public:
  template <class T>
  void add(const std::string& key, const T& value) {
    j_[key] = value;
    std::ostringstream os;
    os << std::setprecision(10) << std::boolalpha << value;
    lines_.emplace_back(key, os.str());
  }

  void add_json(const std::string& key, const json& value) {
    j_[key] = value;
    lines_.emplace_back(key, value.dump());
  }

  void emit(std::ostream& os, bool as_json) const {
    if (as_json) {
      os << j_.dump(2) << '\n';
      return;
    }
    for (const auto& [k, v] : lines_) os << k << ": " << v << '\n';
  }

private:
  nlohmann::ordered_json j_ = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::string>> lines_;
};

std::vector<std::string> provenance(const Context& ctx, std::optional<std::uint64_t> seed = {}) {
  std::vector<std::string> lines{"config_sha256=" + ctx.digest};
  if (seed) lines.push_back("seed=" + std::to_string(*seed));
  return lines;
}

jsa::JointAmplitude configured_jsa(const RunConfig& c) {
  auto f = jsa::compute_jsa(c.pump, c.crystal_spec(), c.grid);
  if (c.signal_filter || c.idler_filter) f = jsa::apply_filter(f, c.signal_filter, c.idler_filter);
  return f;
}

int run_design(const Context& ctx) {
  const auto& c = ctx.config;
  const auto crystal = c.crystal_spec();
  const double pump_nm = c.pump.center_wavelength_nm;
  const double daughter_nm = 2.0 * pump_nm;
  Report r;
  r.add("poling_period_um",
        phasematch::solve_poling_period(pump_nm, daughter_nm, daughter_nm, crystal.temperature_c, crystal.axes));
  r.add("gvm_wavelength_nm", phasematch::gvm_degenerate_wavelength(crystal.axes, crystal.temperature_c));
  r.add("gvm_angle_deg", phasematch::gvm_angle(pump_nm, daughter_nm, daughter_nm, crystal.axes, crystal.temperature_c));
  r.add("pump_nm", pump_nm);
  r.add("temperature_c", crystal.temperature_c);
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  if (ctx.request.out) {
    auto f = open_output(*ctx.request.out);
    r.emit(f, ctx.request.json);
  }
  return kExitOk;
}

void write_grid_header(std::ostream& os, const Context& ctx, const jsa::FrequencyGrid& g) {
  for (const auto& p : provenance(ctx)) os << "# " << p << '\n';
  os << "# center_signal_nm=" << g.center_signal_nm << " center_idler_nm=" << g.center_idler_nm
     << " half_span_nm=" << g.half_span_nm << " points=" << g.points_per_axis << '\n';
  os << "# rows: signal omega (rad/fs), columns: idler omega (rad/fs)\n";
}

int run_jsa(const Context& ctx) {
  const auto f = configured_jsa(ctx.config);
  const auto schmidt = jsa::schmidt_decompose(f);
  const auto ms = jsa::marginal_spectrum(f, jsa::Arm::signal);
  const auto mi = jsa::marginal_spectrum(f, jsa::Arm::idler);
  const auto dir = output_dir(ctx);
  const auto ws = f.grid.signal_omegas();
  const auto wi = f.grid.idler_omegas();
  const auto n = static_cast<Eigen::Index>(wi.size());

  {
    auto os = open_output(dir / "jsa_amplitude.csv");
    write_grid_header(os, ctx, f.grid);
    os << "omega_s";
    for (double w : wi) os << ",re@" << w << ",im@" << w;
    os << '\n';
    for (Eigen::Index i = 0; i < f.amplitudes.rows(); ++i) {
      os << ws[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) os << ',' << f.amplitudes(i, j).real() << ',' << f.amplitudes(i, j).imag();
      os << '\n';
    }
  }
  {
    auto os = open_output(dir / "jsi.csv");
    write_grid_header(os, ctx, f.grid);
    os << "omega_s";
    for (double w : wi) os << ',' << w;
    os << '\n';
    for (Eigen::Index i = 0; i < f.amplitudes.rows(); ++i) {
      os << ws[static_cast<std::size_t>(i)];
      for (Eigen::Index j = 0; j < n; ++j) os << ',' << std::norm(f.amplitudes(i, j));
      os << '\n';
    }
  }

  Report r;
  r.add("purity", schmidt.purity);
  r.add("schmidt_number", schmidt.schmidt_number);
  const std::size_t shown = std::min<std::size_t>(10, schmidt.coefficients.size());
  r.add_json("schmidt_coefficients",
             json(std::vector<double>(schmidt.coefficients.begin(), schmidt.coefficients.begin() + static_cast<long>(shown))));
  r.add("signal_fwhm_nm", ms.fwhm_nm);
  r.add("idler_fwhm_nm", mi.fwhm_nm);
  r.add("filter_survival_joint", f.filter_loss.joint);
  r.add("filter_survival_signal", f.filter_loss.signal_arm);
  r.add("filter_survival_idler", f.filter_loss.idler_arm);
  r.add("config_sha256", ctx.digest);
  {
    auto os = open_output(dir / (ctx.request.json ? "schmidt.json" : "schmidt.txt"));
    r.emit(os, ctx.request.json);
  }
  r.emit(ctx.out, ctx.request.json);
  return kExitOk;
}

} // namespace

std::vector<double> parse_delays(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) throw Error(ErrorKind::parse, "bad --delays value '" + spec + "'");
    parts.push_back(v);
  }
  if (parts.size() != 3) throw Error(ErrorKind::parse, "--delays expects start:stop:step, got '" + spec + "'");
  return parts;
}

namespace {

std::vector<double> delay_axis(double start, double stop, double step) {
  if (!(step > 0.0) || stop < start) throw Error(ErrorKind::input, "delays need step > 0 and stop >= start");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> d;
  for (long k = 0; k < count; ++k) d.push_back(start + static_cast<double>(k) * step);
  return d;
}

int run_hom(const Context& ctx) {
  const auto& c = ctx.config;
  auto f = jsa::compute_jsa(c.pump, c.crystal_spec(), c.grid);
  std::optional<jsa::FilterSpec> fs_signal = c.signal_filter, fs_idler = c.idler_filter;
  if (ctx.request.filter_nm) {
    fs_signal = jsa::FilterSpec{c.grid.center_signal_nm, *ctx.request.filter_nm, jsa::FilterShape::gaussian, 1.0};
    fs_idler = jsa::FilterSpec{c.grid.center_idler_nm, *ctx.request.filter_nm, jsa::FilterShape::gaussian, 1.0};
  }
  if (fs_signal || fs_idler) f = jsa::apply_filter(f, fs_signal, fs_idler);

  std::vector<double> delays;
  if (ctx.request.delays) {
    const auto p = parse_delays(*ctx.request.delays);
    delays = delay_axis(p[0], p[1], p[2]);
  } else {
    delays = delay_axis(c.hom.delay_start_fs, c.hom.delay_stop_fs, c.hom.delay_step_fs);
  }

  const auto state = interference::heralded_spectral_state(f, jsa::Arm::signal);
  const auto prediction = interference::predict_visibility(state, state, c.hom.multipair_probability);
  const auto curve = interference::hom_curve(state, state, delays);

  {
    auto os = open_output(output_file(ctx, "hom.csv"));
    for (const auto& p : provenance(ctx)) os << "# " << p << '\n';
    os << "delay_fs,coincidence_probability\n";
    for (std::size_t k = 0; k < delays.size(); ++k) os << delays[k] << ',' << curve.coincidence_probability[k] << '\n';
  }
  Report r;
  r.add("visibility", prediction.spectral);
  r.add("multipair_bound", prediction.multipair);
  r.add("visibility_total", prediction.total);
  r.add("filter_fwhm_nm", ctx.request.filter_nm ? *ctx.request.filter_nm : 0.0);
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  return kExitOk;
}

int run_tomo_simulate(const Context& ctx) {
  const auto& t = ctx.config.tomography;
  const std::uint64_t seed = ctx.request.seed.value_or(ctx.config.seeds.tomography);
  const auto state = polarization::model_state(t.depolarization, t.amplitude_imbalance, t.phase_error_rad);
  const auto records = polarization::simulate_tomography(state, polarization::standard_settings(), t.mean_counts, seed);
  const auto path = output_file(ctx, "tomography.csv");
  {
    auto os = open_output(path);
    polarization::write_records_csv(os, records, provenance(ctx, seed));
  }
  Report r;
  r.add("records", records.size());
  r.add("model_fidelity", polarization::fidelity_singlet(state));
  r.add("seed", seed);
  r.add("output", path.string());
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  return kExitOk;
}

int run_tomo_reconstruct(const Context& ctx) {
  if (!ctx.request.in) throw Error(ErrorKind::input, "tomo reconstruct requires --in <csv>");
  std::ifstream in(*ctx.request.in);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + *ctx.request.in + "'");
  const auto records = polarization::read_records_csv(in);
  const auto mle = polarization::reconstruct_mle(records);
  Report r;
  r.add("fidelity", polarization::fidelity_singlet(mle.state));
  r.add("purity", polarization::state_purity(mle.state));
  r.add("concurrence", polarization::concurrence(mle.state));
  r.add("tangle", polarization::tangle(mle.state));
  r.add("iterations", mle.iterations);
  r.add("gradient_norm", mle.gradient_norm);
  r.add("converged", mle.converged);
  json rho = json::array();
  for (int i = 0; i < 4; ++i) {
    json row = json::array();
    for (int j = 0; j < 4; ++j) row.push_back({mle.state.rho()(i, j).real(), mle.state.rho()(i, j).imag()});
    rho.push_back(row);
  }
  r.add_json("density_matrix", rho);
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  if (ctx.request.out) {
    auto os = open_output(*ctx.request.out);
    r.emit(os, true);
  }
  return kExitOk;
}

int run_spectro(const Context& ctx) {
  const auto& c = ctx.config;
  const std::uint64_t seed = ctx.request.seed.value_or(c.seeds.spectrometer);
  const std::uint64_t pairs = ctx.request.pairs.value_or(c.spectrometer.pairs);
  const auto f = configured_jsa(c);
  const auto hist = spectrometer::simulate_jsi_histogram(f, c.spectrometer.signal_dcf, c.spectrometer.idler_dcf,
                                                         c.pump, c.spectrometer.bin_size_ns, pairs, seed);
  const auto path = output_file(ctx, "histogram.csv");
  {
    auto os = open_output(path);
    spectrometer::write_histogram_csv(os, hist, provenance(ctx, seed));
  }
  Report r;
  r.add("pairs", pairs);
  r.add("counted", hist.total_counts());
  r.add("wraps", hist.wraps);
  r.add("window_ns", hist.window_ns);
  r.add("period_ns", hist.period_ns);
  r.add("resolution_signal_nm", spectrometer::resolution_estimate(c.spectrometer.signal_dcf, c.spectrometer.bin_size_ns));
  r.add("resolution_idler_nm", spectrometer::resolution_estimate(c.spectrometer.idler_dcf, c.spectrometer.bin_size_ns));
  r.add("bin_correlation", spectrometer::bin_correlation(hist));
  try {
    const auto chi = spectrometer::chi2_independence(hist.counts);
    r.add("chi2", chi.chi2);
    r.add("chi2_dof", chi.dof);
    r.add("chi2_p_value", chi.p_value);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate_input) throw;
    r.add_json("chi2", nullptr);
    r.add("chi2_note", std::string(e.what()));
  }
  r.add("seed", seed);
  r.add("output", path.string());
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  return kExitOk;
}

int run_efficiency(const Context& ctx) {
  Report r;
  if (ctx.request.counts) {
    std::ifstream in(*ctx.request.counts);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + *ctx.request.counts + "'");
    const auto counts = efficiency::read_counts_csv(in);
    const auto k = efficiency::klyshko(counts);
    r.add("klyshko_signal", k.signal);
    r.add("klyshko_idler", k.idler);
    r.add("coincidence_rate_hz", counts.coincidences / counts.integration_s);
  }
  efficiency::LossBudget budget = ctx.config.budget;
  if (ctx.request.budget) {
    std::ifstream in(*ctx.request.budget);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + *ctx.request.budget + "'");
    try {
      budget = efficiency::budget_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::input, *ctx.request.budget + ": " + e.what());
    }
  }
  r.add("predicted_heralding_signal", efficiency::predict_heralding(budget.signal));
  r.add("predicted_heralding_idler", efficiency::predict_heralding(budget.idler));
  r.add("config_sha256", ctx.digest);
  r.emit(ctx.out, ctx.request.json);
  if (ctx.request.out) {
    auto os = open_output(*ctx.request.out);
    r.emit(os, ctx.request.json);
  }
  return kExitOk;
}

} // namespace

void write_error_record(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

int run_pipeline(const RunConfig& config, const PipelineRequest& request, std::ostream& out,
                 std::ostream& err) {
  using Handler = int (*)(const Context&);
  static const std::vector<std::pair<std::string, Handler>> handlers{
      {"design", run_design},
      {"jsa compute", run_jsa},
      {"hom", run_hom},
      {"tomo simulate", run_tomo_simulate},
      {"tomo reconstruct", run_tomo_reconstruct},
      {"spectro simulate", run_spectro},
      {"efficiency", run_efficiency},
  };
  Handler handler = nullptr;
  for (const auto& [name, h] : handlers)
    if (name == request.command) handler = h;
  if (!handler) {
    write_error_record(err, "usage", "unknown command '" + request.command + "'");
    return kExitUsage;
  }
  try {
    const Context ctx{config, request, config_digest(config), out};
    return handler(ctx);
  } catch (const Error& e) {
    write_error_record(err, std::string(to_string(e.kind())), e.what());
    return kExitComputation;
  } catch (const std::exception& e) {
    write_error_record(err, "internal", e.what());
    return kExitComputation;
  }
}

} // namespace spdc::cli
