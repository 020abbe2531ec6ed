#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdc/config.hpp"

namespace spdc::cli {

enum ExitCode : int { kExitOk = 0, kExitComputation = 1, kExitUsage = 2 };

/// One subcommand invocation. `command` is the flattened name, e.g.
/// "jsa compute" or "tomo simulate".
struct PipelineRequest {
  std::string command;
  bool json = false;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> filter_nm;
  std::optional<std::string> delays;   // "start:stop:step" in fs
  std::optional<std::string> in;
  std::optional<std::uint64_t> pairs;
  std::optional<std::string> counts;
  std::optional<std::string> budget;
};

/// Runs `request` against `config`. Reports go to `out`; failures are written
/// to `err` as a single-line JSON record {"error": kind, "message": ...}.
int run_pipeline(const RunConfig& config, const PipelineRequest& request, std::ostream& out,
                 std::ostream& err);

/// Splits "start:stop:step" into three numbers; throws a parse error otherwise.
std::vector<double> parse_delays(const std::string& spec);

void write_error_record(std::ostream& err, const std::string& kind, const std::string& message);

} // namespace spdc::cli
