#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spdc/config.hpp"
#include "spdc/errors.hpp"
#include "spdc/pipeline.hpp"

namespace {

std::string flatten(const CLI::App& app) {
  for (const auto* sub : app.get_subcommands()) {
    const std::string tail = flatten(*sub);
    return tail.empty() ? sub->get_name() : sub->get_name() + " " + tail;
  }
  return {};
}

} // namespace

int main(int argc, char** argv) {
  using namespace spdc::cli;

  CLI::App app{"SPDC source design and characterization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::string> dispersion_file;
  PipelineRequest request;

  app.add_option("--config", config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", request.out, "Output file or directory");
  app.add_option("--seed", request.seed, "Override the configured random seed");
  app.add_flag("--json", request.json, "Machine-readable report");
  app.add_option("--dispersion-file", dispersion_file, "Sellmeier registry (JSON)")->check(CLI::ExistingFile);

  app.add_subcommand("design", "Poling period, GVM wavelength and ridge angle");

  auto* jsa = app.add_subcommand("jsa", "Joint spectral amplitude");
  jsa->require_subcommand(1);
  jsa->add_subcommand("compute", "Compute JSA, JSI and Schmidt report");

  auto* hom = app.add_subcommand("hom", "Hong-Ou-Mandel interference of heralded photons");
  hom->add_option("--filter-nm", request.filter_nm, "Gaussian filter FWHM on both arms")->check(CLI::PositiveNumber);
  hom->add_option("--delays", request.delays, "Delay scan start:stop:step in fs")
      ->check([](const std::string& value) -> std::string {
        try {
          parse_delays(value);
        } catch (const spdc::Error& e) {
          return e.what();
        }
        return {};
      });

  auto* tomo = app.add_subcommand("tomo", "Polarization tomography");
  tomo->require_subcommand(1);
  tomo->add_subcommand("simulate", "Simulate 36-setting tomography counts");
  auto* reconstruct = tomo->add_subcommand("reconstruct", "Maximum-likelihood reconstruction");
  reconstruct->add_option("--in", request.in, "Tomography records CSV")->required()->check(CLI::ExistingFile);

  auto* spectro = app.add_subcommand("spectro", "Time-of-flight spectrometer");
  spectro->require_subcommand(1);
  auto* simulate = spectro->add_subcommand("simulate", "Simulate a JSI histogram");
  simulate->add_option("--pairs", request.pairs, "Number of sampled pairs")->check(CLI::PositiveNumber);

  auto* eff = app.add_subcommand("efficiency", "Heralding efficiency analysis");
  eff->add_option("--counts", request.counts, "Counts CSV")->check(CLI::ExistingFile);
  eff->add_option("--budget", request.budget, "Loss budget (JSON)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  request.command = flatten(app);

  RunConfig config;
  try {
    config = config_path ? load_config(*config_path) : default_config();
    if (dispersion_file) {
      config.dispersion_file = dispersion_file;
      config.validate();
    }
  } catch (const spdc::Error& e) {
    write_error_record(std::cerr, std::string(spdc::to_string(e.kind())), e.what());
    return kExitComputation;
  }
  return run_pipeline(config, request, std::cout, std::cerr);
}
