#pragma once

#include "ggn/training.hpp"

#include <optional>
#include <string>

namespace ggn {

// One run = one case in one mode. Optional fields fall back to the case's
// tuned defaults; the CLI can override either source.
struct RunConfig {
  std::string case_name;
  std::string mode = "forward";
  std::string out_dir;

  std::optional<std::uint64_t> seed;
  std::optional<int> max_iters;
  std::optional<double> loss_tol;
  std::optional<double> lr;
  std::optional<double> penalty_lambda;
  std::optional<int> cheb_order;
  std::optional<std::vector<int>> hidden;
  std::optional<int> log_every;
};

// Strict JSON: unknown keys are an error.
RunConfig load_config(const std::string& path);

void apply_config(const RunConfig& cfg, TrainConfig& train);

// Snapshot of the effective settings, written next to the run outputs.
std::string config_snapshot(const RunConfig& cfg, const TrainConfig& train);

}  // namespace ggn
