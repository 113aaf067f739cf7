#pragma once

#include <functional>
#include <string>

namespace ggn {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values vs bounds, one line
};

int criterion_count();  // fixed suite, ids 1..criterion_count()

// Runs one acceptance criterion end to end (training included, so the heavy
// ones take minutes to hours). The optional log callback streams progress.
CriterionResult run_criterion(int id,
                              const std::function<void(const std::string&)>& log = {});

}  // namespace ggn
