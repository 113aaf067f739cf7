#pragma once

#include "ggn/cases.hpp"
#include "ggn/training.hpp"

#include <map>
#include <string>

namespace ggn {

struct RunSummary {
  double field_error = -1.0;             // relative error against the reference
  std::map<std::string, double> extras;  // per-parameter errors, component errors, ...
};

// Relative errors of the best iterate against problem.reference_state: overall,
// per component, and per inferred parameter / boundary profile where trained.
RunSummary summarize(const CaseProblem& problem, const TrainReport& rep);

// Writes report.json, one <component>.csv per field (node, coordinates, value),
// loss.csv and config.json into dir, creating it if needed.
void write_report(const std::string& dir, const CaseProblem& problem, const TrainReport& rep,
                  const RunSummary& summary, const std::string& config_snapshot);

}  // namespace ggn
