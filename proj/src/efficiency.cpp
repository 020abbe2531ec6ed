#include "spdc/efficiency.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <vector>

#include "spdc/errors.hpp"

namespace spdc::efficiency {

void CountSummary::validate() const {
  if (!(singles_signal >= 0.0 && singles_idler >= 0.0 && coincidences >= 0.0)) {
    throw Error(ErrorKind::validation, "count rates must be non-negative");
  }
  if (!(integration_s > 0.0)) throw Error(ErrorKind::validation, "integration_s must be positive");
  if (accidentals && !(*accidentals >= 0.0)) {
    throw Error(ErrorKind::validation, "accidentals must be non-negative");
  }
  const double net = coincidences - accidentals.value_or(0.0);
  if (net > std::min(singles_signal, singles_idler)) {
    throw Error(ErrorKind::validation, "coincidences exceed the smaller singles rate");
  }
}

KlyshkoEfficiency klyshko(const CountSummary& counts) {
  counts.validate();
  if (!(counts.singles_signal > 0.0) || !(counts.singles_idler > 0.0)) {
    throw Error(ErrorKind::input, "Klyshko efficiency needs non-zero singles in both arms");
  }
  const double net = std::max(0.0, counts.coincidences - counts.accidentals.value_or(0.0));
  return {net / counts.singles_idler, net / counts.singles_signal};
}

void ArmBudget::validate() const {
  for (double f : {detector_efficiency, optics_transmission, fiber_coupling, filter_survival,
                   mode_overlap}) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw Error(ErrorKind::validation, "loss-budget factors must lie in [0, 1]");
    }
  }
}

void LossBudget::validate() const {
  signal.validate();
  idler.validate();
}

double predict_heralding(const ArmBudget& arm) {
  arm.validate();
  return arm.detector_efficiency * arm.optics_transmission * arm.fiber_coupling *
         arm.filter_survival * arm.mode_overlap;
}

namespace {

ArmBudget arm_from_json(const nlohmann::json& j) {
  ArmBudget a;
  a.detector_efficiency = j.value("detector_efficiency", 1.0);
  a.optics_transmission = j.value("optics_transmission", 1.0);
  a.fiber_coupling = j.value("fiber_coupling", 1.0);
  a.filter_survival = j.value("filter_survival", 1.0);
  a.mode_overlap = j.value("mode_overlap", 1.0);
  return a;
}

nlohmann::json arm_to_json(const ArmBudget& a) {
  return {{"detector_efficiency", a.detector_efficiency},
          {"optics_transmission", a.optics_transmission},
          {"fiber_coupling", a.fiber_coupling},
          {"filter_survival", a.filter_survival},
          {"mode_overlap", a.mode_overlap}};
}

} // namespace

LossBudget budget_from_json(const nlohmann::json& j) {
  LossBudget b;
  try {
    if (j.contains("signal")) b.signal = arm_from_json(j.at("signal"));
    if (j.contains("idler")) b.idler = arm_from_json(j.at("idler"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, std::string("loss budget: ") + e.what());
  }
  b.validate();
  return b;
}

nlohmann::json budget_to_json(const LossBudget& budget) {
  return {{"signal", arm_to_json(budget.signal)}, {"idler", arm_to_json(budget.idler)}};
}

CountSummary read_counts_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string field;
    while (std::getline(is, field, ',')) out.push_back(field);
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) + ": field count mismatch");
    }
    CountSummary c;
    bool seen[4] = {false, false, false, false};
    for (std::size_t k = 0; k < header.size(); ++k) {
      double v = 0.0;
      try {
        v = std::stod(fields[k]);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse,
                    "line " + std::to_string(line_no) + ": bad number in '" + header[k] + "'");
      }
      if (header[k] == "singles_signal") { c.singles_signal = v; seen[0] = true; }
      else if (header[k] == "singles_idler") { c.singles_idler = v; seen[1] = true; }
      else if (header[k] == "coincidences") { c.coincidences = v; seen[2] = true; }
      else if (header[k] == "integration_s") { c.integration_s = v; seen[3] = true; }
      else if (header[k] == "accidentals") c.accidentals = v;
      else throw Error(ErrorKind::parse, "unknown counts column '" + header[k] + "'");
    }
    static const char* names[4] = {"singles_signal", "singles_idler", "coincidences", "integration_s"};
    for (int k = 0; k < 4; ++k)
      if (!seen[k]) throw Error(ErrorKind::validation, std::string("counts file is missing '") + names[k] + "'");
    c.validate();
    return c;
  }
  throw Error(ErrorKind::parse, "counts file has no data row");
}

} // namespace spdc::efficiency
